//! Text-first scene rendering: backgrounds, line layout, rasterization and
//! composition with exact ground-truth quads.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::corpus::{LangCode, ParallelTextPair, TextSample};
use crate::font::GlyphSource;
use crate::geometry::{self, blend_into, AlphaMask, GeometryError, Quad, RasterImage, Rect, Rgb};
use crate::math;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("canvas {width}x{height} is below the 32x32 minimum")]
    CanvasTooSmall { width: u32, height: u32 },
    #[error("background kind {0:?} needs an imported image")]
    UnsupportedKind(BackgroundKind),
    #[error("text does not fit the canvas at the minimum scale")]
    LayoutOverflow,
    #[error("text {0:?} does not fit its quad at scale 1")]
    UnrenderableAtMinimumScale(String),
    #[error("empty text")]
    EmptyText,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum BackgroundKind {
    Solid,
    Gradient,
    NoiseTexture,
    Imported,
}

impl BackgroundKind {
    pub const PROCEDURAL: [BackgroundKind; 3] = [BackgroundKind::Solid, BackgroundKind::Gradient, BackgroundKind::NoiseTexture];

    pub fn as_str(&self) -> &'static str {
        match self {
            BackgroundKind::Solid => "solid",
            BackgroundKind::Gradient => "gradient",
            BackgroundKind::NoiseTexture => "noise_texture",
            BackgroundKind::Imported => "imported",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    /// Lines stacked top to bottom at the left margin.
    Document,
    /// Lines placed at random non-overlapping positions.
    Scattered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutStyle {
    pub kind: LayoutKind,
    pub max_lines: u32,
    /// Minimum separation between line quads, px.
    pub gap: u32,
    pub margin: u32,
    pub min_scale: u32,
    pub max_scale: u32,
}

impl Default for LayoutStyle {
    fn default() -> Self {
        LayoutStyle { kind: LayoutKind::Document, max_lines: 16, gap: 4, margin: 8, min_scale: 1, max_scale: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextRegion {
    pub quad: Quad,
    pub text: String,
    pub line_index: u32,
    pub occluded_fraction: f64,
    pub language: LangCode,
    /// Set when a geometric degradation pushed part of the quad off canvas.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedSample {
    pub image: RasterImage,
    pub regions: Vec<TextRegion>,
    pub pair: ParallelTextPair,
    pub background_kind: BackgroundKind,
}

fn check_canvas(w: u32, h: u32) -> Result<(), RenderError> {
    if w < 32 || h < 32 {
        Err(RenderError::CanvasTooSmall { width: w, height: h })
    } else {
        Ok(())
    }
}

fn random_color(rng: &mut Rng) -> Rgb {
    [rng.below(256) as u8, rng.below(256) as u8, rng.below(256) as u8]
}

pub fn solid(color: Rgb, w: u32, h: u32) -> Result<RasterImage, RenderError> {
    Ok(RasterImage::new(w, h, color)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientAxis {
    Horizontal,
    Vertical,
    Diagonal,
}

/// Linear interpolation from `from` to `to` along `axis`, evaluated at pixel
/// centers.
pub fn gradient(from: Rgb, to: Rgb, axis: GradientAxis, w: u32, h: u32) -> Result<RasterImage, RenderError> {
    let mut img = RasterImage::new(w, h, from)?;
    let (fw, fh) = (f64::from(w), f64::from(h));
    for y in 0..h {
        for x in 0..w {
            let tx = (f64::from(x) + 0.5) / fw;
            let ty = (f64::from(y) + 0.5) / fh;
            let t = match axis {
                GradientAxis::Horizontal => tx,
                GradientAxis::Vertical => ty,
                GradientAxis::Diagonal => (tx + ty) / 2.0,
            };
            let mut c = [0u8; 3];
            for k in 0..3 {
                let (a, b) = (f64::from(from[k]), f64::from(to[k]));
                c[k] = math::to_u8(a + (b - a) * t);
            }
            img.put(x, y, c);
        }
    }
    Ok(img)
}

/// Maximum luminance offset of the value-noise texture.
pub const NOISE_JITTER: f64 = 24.0;
const NOISE_CELL: u32 = 16;

/// Value noise around `base`: a 16 px lattice of offsets, bilinearly
/// interpolated, mixed 3:1 with per-pixel offsets. The same offset goes to
/// all three channels, so only luminance varies, by at most ±24.
pub fn noise_texture(base: Rgb, w: u32, h: u32, rng: &mut Rng) -> Result<RasterImage, RenderError> {
    let mut img = RasterImage::new(w, h, base)?;
    let gw = (w / NOISE_CELL + 2) as usize;
    let gh = (h / NOISE_CELL + 2) as usize;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.uniform(-NOISE_JITTER, NOISE_JITTER)).collect();
    let cell = f64::from(NOISE_CELL);
    for y in 0..h {
        let gy = (f64::from(y) + 0.5) / cell;
        let iy = math::floor(gy) as usize;
        let ty = gy - math::floor(gy);
        for x in 0..w {
            let gx = (f64::from(x) + 0.5) / cell;
            let ix = math::floor(gx) as usize;
            let tx = gx - math::floor(gx);
            let at = |i: usize, j: usize| lattice[j * gw + i];
            let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
            let bot = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
            let smooth = top * (1.0 - ty) + bot * ty;
            let fine = rng.uniform(-NOISE_JITTER, NOISE_JITTER);
            let j = (0.75 * smooth + 0.25 * fine).clamp(-NOISE_JITTER, NOISE_JITTER);
            let c = [
                math::to_u8(f64::from(base[0]) + j),
                math::to_u8(f64::from(base[1]) + j),
                math::to_u8(f64::from(base[2]) + j),
            ];
            img.put(x, y, c);
        }
    }
    Ok(img)
}

/// Generate a `w x h` background. `imported` is required for
/// [`BackgroundKind::Imported`] and is bilinearly resampled to the canvas.
pub fn generate_background(
    kind: BackgroundKind,
    w: u32,
    h: u32,
    rng: &mut Rng,
    imported: Option<&RasterImage>,
) -> Result<RasterImage, RenderError> {
    check_canvas(w, h)?;
    match kind {
        BackgroundKind::Solid => solid(random_color(rng), w, h),
        BackgroundKind::Gradient => {
            let (a, b) = (random_color(rng), random_color(rng));
            let axis = [GradientAxis::Horizontal, GradientAxis::Vertical, GradientAxis::Diagonal][rng.index(3)];
            gradient(a, b, axis, w, h)
        }
        BackgroundKind::NoiseTexture => {
            let base = [
                rng.range_i64(24, 231) as u8,
                rng.range_i64(24, 231) as u8,
                rng.range_i64(24, 231) as u8,
            ];
            noise_texture(base, w, h, rng)
        }
        BackgroundKind::Imported => {
            let src = imported.ok_or(RenderError::UnsupportedKind(BackgroundKind::Imported))?;
            Ok(geometry::resize_bilinear(src, w, h))
        }
    }
}

fn line_size(glyphs: &dyn GlyphSource, text: &str, scale: u32) -> (u32, u32) {
    (glyphs.text_width(text, scale), glyphs.line_height(scale))
}

fn document_fits(glyphs: &dyn GlyphSource, lines: &[String], w: u32, h: u32, style: &LayoutStyle, s: u32) -> bool {
    let avail_w = w.saturating_sub(2 * style.margin);
    let avail_h = h.saturating_sub(2 * style.margin);
    let n = lines.len() as u32;
    let total_h = n * glyphs.line_height(s) + n.saturating_sub(1) * style.gap;
    total_h <= avail_h && lines.iter().all(|l| glyphs.text_width(l, s) <= avail_w)
}

fn scattered_fits(glyphs: &dyn GlyphSource, lines: &[String], w: u32, h: u32, style: &LayoutStyle, s: u32) -> bool {
    let avail_w = w.saturating_sub(2 * style.margin);
    let avail_h = h.saturating_sub(2 * style.margin);
    glyphs.line_height(s) <= avail_h && lines.iter().all(|l| glyphs.text_width(l, s) <= avail_w)
}

fn pick_scale(
    rng: &mut Rng,
    style: &LayoutStyle,
    fits: impl Fn(u32) -> bool,
) -> Result<u32, RenderError> {
    let min = style.min_scale.max(1);
    let max = style.max_scale.max(min);
    let best = (min..=max).rev().find(|&s| fits(s)).ok_or(RenderError::LayoutOverflow)?;
    let low = min.max(best.div_ceil(2));
    Ok(low + rng.below(u64::from(best - low + 1)) as u32)
}

/// One axis-aligned quad per line, sized to the line's advance and line
/// height at a sampled scale.
pub fn layout_text(
    sample: &TextSample,
    w: u32,
    h: u32,
    style: &LayoutStyle,
    glyphs: &dyn GlyphSource,
    rng: &mut Rng,
) -> Result<Vec<Quad>, RenderError> {
    check_canvas(w, h)?;
    let lines = &sample.lines;
    if lines.len() as u32 > style.max_lines {
        return Err(RenderError::LayoutOverflow);
    }
    let m = f64::from(style.margin);
    match style.kind {
        LayoutKind::Document => {
            let s = pick_scale(rng, style, |s| document_fits(glyphs, lines, w, h, style, s))?;
            let lh = glyphs.line_height(s);
            let mut quads = Vec::with_capacity(lines.len());
            let mut y = m;
            for line in lines {
                let lw = glyphs.text_width(line, s);
                quads.push(Quad::from_rect(m, y, m + f64::from(lw), y + f64::from(lh))?);
                y += f64::from(lh + style.gap);
            }
            Ok(quads)
        }
        LayoutKind::Scattered => {
            let mut s = pick_scale(rng, style, |s| scattered_fits(glyphs, lines, w, h, style, s))?;
            loop {
                if let Some(q) = scatter_at_scale(lines, w, h, style, glyphs, s, rng)? {
                    return Ok(q);
                }
                if s <= style.min_scale.max(1) {
                    return Err(RenderError::LayoutOverflow);
                }
                s -= 1;
            }
        }
    }
}

const MAX_PLACEMENT_ATTEMPTS: u32 = 1000;

fn scatter_at_scale(
    lines: &[String],
    w: u32,
    h: u32,
    style: &LayoutStyle,
    glyphs: &dyn GlyphSource,
    s: u32,
    rng: &mut Rng,
) -> Result<Option<Vec<Quad>>, RenderError> {
    let gap = f64::from(style.gap);
    let mut placed: Vec<Rect> = Vec::with_capacity(lines.len());
    for line in lines {
        let (lw, lh) = line_size(glyphs, line, s);
        let x_max = i64::from(w) - i64::from(style.margin) - i64::from(lw);
        let y_max = i64::from(h) - i64::from(style.margin) - i64::from(lh);
        let lo = i64::from(style.margin);
        if x_max < lo || y_max < lo {
            return Ok(None);
        }
        let mut ok = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let x = rng.range_i64(lo, x_max) as f64;
            let y = rng.range_i64(lo, y_max) as f64;
            let r = Rect::new(x, y, x + f64::from(lw), y + f64::from(lh));
            if placed.iter().all(|p| !p.inflate(gap).intersects(&r)) {
                ok = Some(r);
                break;
            }
        }
        match ok {
            Some(r) => placed.push(r),
            None => return Ok(None),
        }
    }
    let quads = placed
        .iter()
        .map(|r| Quad::from_rect(r.x0, r.y0, r.x1, r.y1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(quads))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterizedLine {
    /// Solid `ink` patch the size of the quad's pixel bounding box.
    pub patch: RasterImage,
    pub alpha: AlphaMask,
    pub scale: u32,
    /// Pixel position of the patch's top-left corner.
    pub origin: (i64, i64),
}

/// Largest integer scale with `advance <= max_w` and `line height <= max_h`.
pub fn max_fitting_scale(glyphs: &dyn GlyphSource, text: &str, max_w: f64, max_h: f64) -> Option<u32> {
    let fits = |s: u32| {
        let (w, h) = line_size(glyphs, text, s);
        f64::from(w) <= max_w && f64::from(h) <= max_h
    };
    if !fits(1) {
        return None;
    }
    let mut s = 1;
    // Line height grows with scale, so the height bound terminates the loop.
    while fits(s + 1) {
        s += 1;
    }
    Some(s)
}

/// Draw `text` at scale `scale` into an alpha mask of `w x h`, left-aligned
/// at `x_off` and vertically centered within `[y_top, y_top + avail_h)`.
pub fn draw_text_alpha(
    glyphs: &dyn GlyphSource,
    text: &str,
    scale: u32,
    w: u32,
    h: u32,
    x_off: u32,
    y_top: u32,
    avail_h: u32,
) -> AlphaMask {
    let mut alpha = AlphaMask::new(w, h);
    let lh = glyphs.line_height(scale);
    let y0 = y_top + avail_h.saturating_sub(lh) / 2;
    let mut pen = x_off;
    for ch in text.chars() {
        let g = glyphs.glyph(ch, scale);
        for gy in 0..g.bitmap.height() {
            let y = y0 + gy;
            if y >= h {
                break;
            }
            for gx in 0..g.bitmap.width() {
                let x = pen + gx;
                if x >= w {
                    break;
                }
                let a = g.bitmap.get(gx, gy);
                if a > alpha.get(x, y) {
                    alpha.set(x, y, a);
                }
            }
        }
        pen += g.advance;
    }
    alpha
}

/// Rasterize one line into its quad's pixel bounding box at the largest
/// integer scale that fits.
pub fn rasterize_line(text: &str, quad: &Quad, glyphs: &dyn GlyphSource, ink: Rgb) -> Result<RasterizedLine, RenderError> {
    if text.is_empty() {
        return Err(RenderError::EmptyText);
    }
    let b = quad.bounds();
    let x0 = math::floor(b.x0);
    let y0 = math::floor(b.y0);
    let w = (math::ceil(b.x1) - x0).max(1.0) as u32;
    let h = (math::ceil(b.y1) - y0).max(1.0) as u32;
    let scale = max_fitting_scale(glyphs, text, f64::from(w), f64::from(h))
        .ok_or_else(|| RenderError::UnrenderableAtMinimumScale(String::from(text)))?;
    let alpha = draw_text_alpha(glyphs, text, scale, w, h, 0, 0, h);
    let patch = RasterImage::new(w, h, ink)?;
    Ok(RasterizedLine { patch, alpha, scale, origin: (x0 as i64, y0 as i64) })
}

/// Minimum luma difference between text ink and the background under it.
pub const MIN_CONTRAST: f64 = 60.0;

/// Gray ink at least 90 luma levels away from `bg_luma`, darker on light
/// backgrounds and lighter on dark ones.
pub fn contrasting_ink(bg_luma: f64, rng: &mut Rng) -> Rgb {
    let v = if bg_luma >= 128.0 {
        let hi = math::floor(bg_luma - 90.0).clamp(0.0, 60.0) as i64;
        rng.range_i64(0, hi)
    } else {
        let lo = math::ceil(bg_luma + 90.0).clamp(195.0, 255.0) as i64;
        rng.range_i64(lo, 255)
    } as u8;
    [v, v, v]
}

#[derive(Debug, Clone, Copy)]
pub struct SceneSpec<'a> {
    pub width: u32,
    pub height: u32,
    pub layout: LayoutStyle,
    pub background: BackgroundKind,
    pub imported: Option<&'a RasterImage>,
}

/// Render the source side of `pair` into a fresh scene.
pub fn compose_scene(
    pair: &ParallelTextPair,
    spec: &SceneSpec<'_>,
    glyphs: &dyn GlyphSource,
    rng: &mut Rng,
) -> Result<RenderedSample, RenderError> {
    let mut image = generate_background(spec.background, spec.width, spec.height, rng, spec.imported)?;
    let quads = layout_text(&pair.src, spec.width, spec.height, &spec.layout, glyphs, rng)?;
    let mut regions = Vec::with_capacity(quads.len());
    for (i, (quad, text)) in quads.iter().zip(pair.src.lines.iter()).enumerate() {
        let bg = image.mean_luma_in(quad).unwrap_or(128.0);
        let ink = contrasting_ink(bg, rng);
        let line = rasterize_line(text, quad, glyphs, ink)?;
        blend_into(&mut image, &line.patch, &line.alpha, line.origin);
        regions.push(TextRegion {
            quad: *quad,
            text: text.clone(),
            line_index: i as u32,
            occluded_fraction: 0.0,
            language: pair.src.line_languages[i].clone(),
            clipped: false,
        });
    }
    Ok(RenderedSample { image, regions, pair: pair.clone(), background_kind: spec.background })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::identity_pair;
    use crate::font::BuiltinFont;

    fn sample(lines: &[&str]) -> TextSample {
        TextSample::new(lines.iter().map(|s| String::from(*s)).collect(), LangCode::new("en").unwrap(), "t").unwrap()
    }

    #[test]
    fn solid_background() {
        let img = solid([200, 200, 200], 40, 40).unwrap();
        assert!(img.pixels().iter().all(|&v| v == 200));
    }

    #[test]
    fn degenerate_gradient_is_constant() {
        for axis in [GradientAxis::Horizontal, GradientAxis::Vertical, GradientAxis::Diagonal] {
            let img = gradient([10, 20, 30], [10, 20, 30], axis, 40, 33).unwrap();
            assert_eq!(img, solid([10, 20, 30], 40, 33).unwrap());
        }
    }

    #[test]
    fn noise_stays_within_jitter() {
        let img = noise_texture([128, 128, 128], 100, 64, &mut Rng::new(5)).unwrap();
        assert!(img.pixels().iter().all(|&v| (104..=152).contains(&v)));
        assert!(img.pixels().iter().any(|&v| v != 128));
    }

    #[test]
    fn background_size_and_kind_errors() {
        let mut r = Rng::new(1);
        assert!(matches!(generate_background(BackgroundKind::Solid, 31, 40, &mut r, None), Err(RenderError::CanvasTooSmall { .. })));
        assert!(matches!(
            generate_background(BackgroundKind::Imported, 40, 40, &mut r, None),
            Err(RenderError::UnsupportedKind(_))
        ));
        let src = solid([1, 2, 3], 10, 10).unwrap();
        let img = generate_background(BackgroundKind::Imported, 40, 40, &mut r, Some(&src)).unwrap();
        assert_eq!(img, solid([1, 2, 3], 40, 40).unwrap());
    }

    #[test]
    fn document_single_line() {
        let style = LayoutStyle::default();
        let q = layout_text(&sample(&["hello"]), 200, 100, &style, &BuiltinFont, &mut Rng::new(0)).unwrap();
        assert_eq!(q.len(), 1);
        let c = q[0].corners();
        assert_eq!(c[0].x, f64::from(style.margin));
        assert_eq!(c[0].y, f64::from(style.margin));
        assert!(q[0].is_axis_aligned());
    }

    #[test]
    fn document_lines_stack() {
        let q = layout_text(&sample(&["a", "bb", "ccc"]), 200, 200, &LayoutStyle::default(), &BuiltinFont, &mut Rng::new(3))
            .unwrap();
        let heights: Vec<f64> = q.iter().map(|q| q.bounds().height()).collect();
        assert!(heights.windows(2).all(|w| w[0] == w[1]));
        assert!(q.windows(2).all(|w| w[0].bounds().y0 < w[1].bounds().y0));
    }

    #[test]
    fn layout_overflow() {
        let long = "x".repeat(100);
        let r = layout_text(&sample(&[&long]), 64, 64, &LayoutStyle::default(), &BuiltinFont, &mut Rng::new(0));
        assert_eq!(r, Err(RenderError::LayoutOverflow));
        let style = LayoutStyle { max_lines: 1, ..LayoutStyle::default() };
        let r = layout_text(&sample(&["a", "b"]), 200, 200, &style, &BuiltinFont, &mut Rng::new(0));
        assert_eq!(r, Err(RenderError::LayoutOverflow));
    }

    #[test]
    fn scattered_quads_are_disjoint() {
        let style = LayoutStyle { kind: LayoutKind::Scattered, ..LayoutStyle::default() };
        let s = sample(&["one", "two", "three", "four", "five"]);
        let q = layout_text(&s, 320, 240, &style, &BuiltinFont, &mut Rng::new(11)).unwrap();
        assert_eq!(q.len(), 5);
        let gap = f64::from(style.gap);
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                let (a, b) = (q[i].bounds(), q[j].bounds());
                // brute force: no pixel of the gap-inflated a lies in b
                let separated = a.x1 + gap <= b.x0 || b.x1 + gap <= a.x0 || a.y1 + gap <= b.y0 || b.y1 + gap <= a.y0;
                assert!(separated, "quads {i} and {j} too close");
            }
        }
    }

    #[test]
    fn rasterize_single_glyph() {
        let q = Quad::from_rect(10.0, 5.0, 50.0, 60.0).unwrap();
        let line = rasterize_line("A", &q, &BuiltinFont, [0, 0, 0]).unwrap();
        // width 40 allows scale 5, height 55 allows scale 3
        assert_eq!(line.scale, 3);
        let g = BuiltinFont.glyph('A', 3);
        let y_off = (55 - 48) / 2;
        for y in 0..55 {
            for x in 0..40 {
                let expect = if x < 24 && y >= y_off && y < y_off + 48 { g.bitmap.get(x, y - y_off) } else { 0 };
                assert_eq!(line.alpha.get(x, y), expect);
            }
        }
    }

    #[test]
    fn rasterize_advances_monotonically() {
        let q = Quad::from_rect(0.0, 0.0, 16.0, 16.0).unwrap();
        let line = rasterize_line("AB", &q, &BuiltinFont, [0, 0, 0]).unwrap();
        let s = line.scale;
        let a = BuiltinFont.glyph('A', s);
        let b = BuiltinFont.glyph('B', s);
        // every ink pixel right of A's advance box belongs to B and vice versa
        for y in 0..16 {
            for x in 0..16 {
                let expect = if x < a.advance { a.bitmap.get(x, y) } else { b.bitmap.get(x - a.advance, y) };
                assert_eq!(line.alpha.get(x, y), expect);
            }
        }
    }

    #[test]
    fn rasterize_scale_is_maximal() {
        for (w, h) in [(33.0, 17.0), (100.0, 40.0), (64.0, 64.0), (200.0, 33.0)] {
            let q = Quad::from_rect(0.0, 0.0, w, h).unwrap();
            let line = rasterize_line("abcd", &q, &BuiltinFont, [0, 0, 0]).unwrap();
            let s = line.scale;
            let fits = |s: u32| f64::from(32 * s) <= w && f64::from(16 * s) <= h;
            assert!(fits(s));
            assert!(!fits(s + 1));
        }
        let tiny = Quad::from_rect(0.0, 0.0, 20.0, 20.0).unwrap();
        assert!(matches!(
            rasterize_line("abcd", &tiny, &BuiltinFont, [0, 0, 0]),
            Err(RenderError::UnrenderableAtMinimumScale(_))
        ));
    }

    #[test]
    fn dark_background_gets_light_text() {
        let mut r = Rng::new(0);
        for _ in 0..100 {
            assert!(contrasting_ink(30.0, &mut r)[0] >= 90);
            assert!(f64::from(contrasting_ink(200.0, &mut r)[0]) <= 140.0);
        }
    }

    #[test]
    fn compose_outside_pixels_match_background() {
        let pair = identity_pair(&sample(&["hi"]));
        let spec = SceneSpec {
            width: 64,
            height: 48,
            layout: LayoutStyle::default(),
            background: BackgroundKind::Solid,
            imported: None,
        };
        let rs = compose_scene(&pair, &spec, &BuiltinFont, &mut Rng::new(4)).unwrap();
        let bg = generate_background(BackgroundKind::Solid, 64, 48, &mut Rng::new(4), None).unwrap();
        assert_eq!(rs.regions.len(), 1);
        let b = rs.regions[0].quad.bounds();
        for y in 0..48 {
            for x in 0..64 {
                let inside = f64::from(x) >= b.x0 && f64::from(x) < b.x1 && f64::from(y) >= b.y0 && f64::from(y) < b.y1;
                if !inside {
                    assert_eq!(rs.image.get(x, y), bg.get(x, y));
                }
            }
        }
        let again = compose_scene(&pair, &spec, &BuiltinFont, &mut Rng::new(4)).unwrap();
        assert_eq!(again.image, rs.image);
    }
}
