//! Visual text translation in three stages: locate text pixels, erase them
//! by harmonic inpainting, then draw the target text through a homography
//! fitted to the region quad.
//!
//! Nothing here samples randomness. Pixels outside the touched set (mask
//! support and destination quad, dilated by two pixels) are never written.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::font::GlyphSource;
use crate::geometry::{blend_pixel, luma, AlphaMask, GeometryError, Homography, Point, Quad, RasterImage, Rgb};
use crate::math;
use crate::render::{draw_text_alpha, max_fitting_scale, TextRegion, MIN_CONTRAST};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VizError {
    #[error("mask is {actual:?}, image is {expected:?}")]
    MaskDimensionMismatch { expected: (u32, u32), actual: (u32, u32) },
    #[error("no text regions found")]
    NoRegionsFound,
    #[error("ground-truth masks need region hints")]
    MissingHints,
    #[error("every pixel is masked; nothing to inpaint from")]
    FullyMaskedImage,
    #[error("a translation job needs at least one region")]
    EmptyJob,
    #[error("region {0}: mask support extends more than 2 px outside its quad")]
    MaskOutsideQuad(usize),
    #[error("text {0:?} does not fit its quad at scale 1")]
    UnrenderableAtMinimumScale(String),
    #[error("empty text")]
    EmptyText,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Where stage one gets its masks from.
#[derive(Debug, Clone, Copy)]
pub enum MaskSource<'a> {
    /// Re-rasterize each hint region's text into its quad.
    GroundTruth,
    /// A composite mask, 255 = text, the size of the image.
    Imported(&'a AlphaMask),
    /// Otsu threshold plus connected components.
    BaselineDetector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquiredRegion {
    pub quad: Quad,
    /// Image-sized binary mask (0 or 255).
    pub mask: AlphaMask,
    /// Index of the hint region this mask belongs to, if any.
    pub hint: Option<usize>,
}

/// Pixel positions whose centers fall inside `quad`, clipped to the canvas.
fn quad_pixels(quad: &Quad, w: u32, h: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if let Some((x0, y0, x1, y1)) = quad.bounds().pixel_span(w, h) {
        for y in y0..y1 {
            for x in x0..x1 {
                if quad.contains(Point::new(f64::from(x) + 0.5, f64::from(y) + 0.5)) {
                    out.push((x, y));
                }
            }
        }
    }
    out
}

/// Rectified patch size of a quad, at least 1x1.
fn rectified_size(quad: &Quad) -> (u32, u32) {
    let w = math::round(quad.rectified_width()).max(1.0);
    let h = math::round(quad.rectified_height()).max(1.0);
    (w as u32, h as u32)
}

/// Draw `alpha` (a `pw x ph` patch placed on the image by `placement`) and
/// call `f(x, y, a)` for every image pixel with nonzero coverage. Only pixels
/// within one pixel of the quad's bounding box are visited.
fn for_each_warped<F: FnMut(u32, u32, u8)>(
    alpha: &AlphaMask,
    placement: &Homography,
    quad: &Quad,
    w: u32,
    h: u32,
    inside_only: bool,
    mut f: F,
) {
    let inv = placement.invert();
    let Some((x0, y0, x1, y1)) = quad.bounds().inflate(1.0).pixel_span(w, h) else { return };
    for y in y0..y1 {
        for x in x0..x1 {
            let c = Point::new(f64::from(x) + 0.5, f64::from(y) + 0.5);
            if inside_only && !quad.contains(c) {
                continue;
            }
            let Ok(p) = inv.apply(c) else { continue };
            let a = math::to_u8(alpha.sample_transparent(p.x, p.y));
            if a > 0 {
                f(x, y, a);
            }
        }
    }
}

/// Mask of the pixels a renderer would have inked for `text` in `quad`.
/// Falls back to the whole quad when the text cannot be laid out.
pub fn ground_truth_mask(text: &str, quad: &Quad, glyphs: &dyn GlyphSource, w: u32, h: u32) -> AlphaMask {
    let mut mask = AlphaMask::new(w, h);
    let (pw, ph) = rectified_size(quad);
    let scale = if text.is_empty() { None } else { max_fitting_scale(glyphs, text, f64::from(pw), f64::from(ph)) };
    let placement = Homography::from_rect_to_quad(f64::from(pw), f64::from(ph), quad);
    match (scale, placement) {
        (Some(s), Ok(placement)) => {
            let alpha = draw_text_alpha(glyphs, text, s, pw, ph, 0, 0, ph);
            for_each_warped(&alpha, &placement, quad, w, h, false, |x, y, _| mask.set(x, y, 255));
        }
        _ => {
            for (x, y) in quad_pixels(quad, w, h) {
                mask.set(x, y, 255);
            }
        }
    }
    mask
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Row-major pixel indices.
    pub pixels: Vec<usize>,
    /// `(x0, y0, x1, y1)`, exclusive max.
    pub bounds: (u32, u32, u32, u32),
}

/// 4-connected components of `on`, in scan order of their first pixel.
pub fn connected_components(on: &[bool], w: u32, h: u32) -> Vec<Component> {
    let (wu, hu) = (w as usize, h as usize);
    let mut seen = alloc::vec![false; on.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..on.len() {
        if !on[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = (i % wu, i / wu);
            x0 = x0.min(x as u32);
            y0 = y0.min(y as u32);
            x1 = x1.max(x as u32 + 1);
            y1 = y1.max(y as u32 + 1);
            let mut visit = |j: usize| {
                if on[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < wu {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - wu);
            }
            if y + 1 < hu {
                visit(i + wu);
            }
        }
        pixels.sort_unstable();
        out.push(Component { pixels, bounds: (x0, y0, x1, y1) });
    }
    out
}

/// Otsu threshold over a 256-bin histogram: returns `t` maximizing the
/// between-class variance of `{v <= t}` and `{v > t}`, or `None` when no
/// split separates anything.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &n)| v as f64 * n as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0.0f64);
    let mut best: Option<(f64, u8)> = None;
    for t in 0..255usize {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if best.map_or(true, |(b, _)| between > b) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

fn component_mask(c: &Component, w: u32, h: u32) -> AlphaMask {
    let mut m = AlphaMask::new(w, h);
    for &i in &c.pixels {
        m.values_mut()[i] = 255;
    }
    m
}

fn bounds_quad(b: (u32, u32, u32, u32)) -> Result<Quad, GeometryError> {
    Quad::from_rect(f64::from(b.0), f64::from(b.1), f64::from(b.2), f64::from(b.3))
}

fn detect(img: &RasterImage) -> Result<Vec<AcquiredRegion>, VizError> {
    let (w, h) = (img.width(), img.height());
    let lumas: Vec<u8> = img.pixels().chunks_exact(3).map(|p| math::to_u8(luma([p[0], p[1], p[2]]))).collect();
    let mut hist = [0u64; 256];
    for &l in &lumas {
        hist[l as usize] += 1;
    }
    let t = otsu_threshold(&hist).ok_or(VizError::NoRegionsFound)?;
    let bright = lumas.iter().filter(|&&l| l > t).count();
    let fg_bright = bright * 2 <= lumas.len();
    let on: Vec<bool> = lumas.iter().map(|&l| (l > t) == fg_bright).collect();
    let max_area = 0.2 * f64::from(w) * f64::from(h);
    let mut out = Vec::new();
    for c in connected_components(&on, w, h) {
        let area = c.pixels.len() as f64;
        let (bw, bh) = (f64::from(c.bounds.2 - c.bounds.0), f64::from(c.bounds.3 - c.bounds.1));
        let aspect = bw / bh;
        if !(20.0..=max_area).contains(&area) || !(0.05..=20.0).contains(&aspect) {
            continue;
        }
        out.push(AcquiredRegion { quad: bounds_quad(c.bounds)?, mask: component_mask(&c, w, h), hint: None });
    }
    if out.is_empty() {
        return Err(VizError::NoRegionsFound);
    }
    Ok(out)
}

/// Split a composite mask into components and attach each to the first hint
/// whose bounding box, grown by 2 px, encloses it. Components of one hint are
/// merged. Unclaimed components keep their own bounding quads.
fn split_imported(mask: &AlphaMask, hints: Option<&[TextRegion]>) -> Result<Vec<AcquiredRegion>, VizError> {
    let (w, h) = (mask.width(), mask.height());
    let on: Vec<bool> = mask.values().iter().map(|&v| v >= 128).collect();
    let comps = connected_components(&on, w, h);
    let hints = hints.unwrap_or(&[]);
    let mut hinted: Vec<Option<AlphaMask>> = alloc::vec![None; hints.len()];
    let mut loose = Vec::new();
    for c in &comps {
        let (x0, y0, x1, y1) = c.bounds;
        let owner = hints.iter().position(|r| {
            let b = r.quad.bounds().inflate(2.0);
            f64::from(x0) >= b.x0 && f64::from(y0) >= b.y0 && f64::from(x1) <= b.x1 && f64::from(y1) <= b.y1
        });
        match owner {
            Some(k) => {
                let m = hinted[k].get_or_insert_with(|| AlphaMask::new(w, h));
                for &i in &c.pixels {
                    m.values_mut()[i] = 255;
                }
            }
            None => loose.push(AcquiredRegion { quad: bounds_quad(c.bounds)?, mask: component_mask(c, w, h), hint: None }),
        }
    }
    let mut out: Vec<AcquiredRegion> = hinted
        .into_iter()
        .enumerate()
        .filter_map(|(k, m)| m.map(|mask| AcquiredRegion { quad: hints[k].quad, mask, hint: Some(k) }))
        .collect();
    out.extend(loose);
    if out.is_empty() {
        return Err(VizError::NoRegionsFound);
    }
    Ok(out)
}

/// Stage one: one image-sized binary mask per text region.
pub fn acquire_masks(
    img: &RasterImage,
    source: MaskSource<'_>,
    hints: Option<&[TextRegion]>,
    glyphs: &dyn GlyphSource,
) -> Result<Vec<AcquiredRegion>, VizError> {
    let (w, h) = (img.width(), img.height());
    match source {
        MaskSource::GroundTruth => {
            let hints = hints.ok_or(VizError::MissingHints)?;
            Ok(hints
                .iter()
                .enumerate()
                .map(|(k, r)| AcquiredRegion {
                    quad: r.quad,
                    mask: ground_truth_mask(&r.text, &r.quad, glyphs, w, h),
                    hint: Some(k),
                })
                .collect())
        }
        MaskSource::Imported(mask) => {
            if !mask.same_size(img) {
                return Err(VizError::MaskDimensionMismatch { expected: (w, h), actual: (mask.width(), mask.height()) });
            }
            split_imported(mask, hints)
        }
        MaskSource::BaselineDetector => detect(img),
    }
}

/// Group detector output under hint regions: a detection belongs to the
/// first hint whose quad contains the center of its bounding box. Unclaimed
/// detections are dropped.
pub fn assign_to_hints(found: &[AcquiredRegion], hints: &[TextRegion]) -> Vec<AcquiredRegion> {
    let mut out: Vec<Option<AcquiredRegion>> = alloc::vec![None; hints.len()];
    for f in found {
        let b = f.quad.bounds();
        let c = Point::new((b.x0 + b.x1) / 2.0, (b.y0 + b.y1) / 2.0);
        let Some(k) = hints.iter().position(|r| r.quad.contains(c)) else { continue };
        let slot = out[k].get_or_insert_with(|| AcquiredRegion {
            quad: hints[k].quad,
            mask: AlphaMask::new(f.mask.width(), f.mask.height()),
            hint: Some(k),
        });
        for (d, &s) in slot.mask.values_mut().iter_mut().zip(f.mask.values()) {
            *d = (*d).max(s);
        }
    }
    out.into_iter().flatten().collect()
}

const INPAINT_TOL: f64 = 0.1;
const INPAINT_MAX_ITERS: usize = 2000;

struct Unknown {
    index: usize,
    fixed: [f64; 3],
    vars: [u32; 4],
    nvars: u8,
    inv_n: f64,
}

/// Stage two: replace pixels with mask value `>= 128` by the harmonic
/// extension of the unmasked pixels (Jacobi iteration, 4-neighbourhood,
/// in-image neighbours only). Unmasked pixels are copied unchanged.
pub fn inpaint(img: &RasterImage, mask: &AlphaMask) -> Result<RasterImage, VizError> {
    let (w, h) = (img.width(), img.height());
    if !mask.same_size(img) {
        return Err(VizError::MaskDimensionMismatch { expected: (w, h), actual: (mask.width(), mask.height()) });
    }
    let masked: Vec<bool> = mask.values().iter().map(|&v| v >= 128).collect();
    let n_masked = masked.iter().filter(|&&m| m).count();
    if n_masked == 0 {
        return Ok(img.clone());
    }
    if n_masked == masked.len() {
        return Err(VizError::FullyMaskedImage);
    }
    let px = img.pixels();
    let mut mean = [0.0f64; 3];
    for (i, &m) in masked.iter().enumerate() {
        if !m {
            for c in 0..3 {
                mean[c] += f64::from(px[i * 3 + c]);
            }
        }
    }
    let n_fixed = (masked.len() - n_masked) as f64;
    for m in &mut mean {
        *m /= n_fixed;
    }

    let mut slot = alloc::vec![u32::MAX; masked.len()];
    let mut order = Vec::with_capacity(n_masked);
    for (i, &m) in masked.iter().enumerate() {
        if m {
            slot[i] = order.len() as u32;
            order.push(i);
        }
    }
    let (wu, hu) = (w as usize, h as usize);
    let unknowns: Vec<Unknown> = order
        .iter()
        .map(|&i| {
            let (x, y) = (i % wu, i / wu);
            let mut u = Unknown { index: i, fixed: [0.0; 3], vars: [0; 4], nvars: 0, inv_n: 0.0 };
            let mut n = 0u32;
            let mut take = |j: usize| {
                n += 1;
                if masked[j] {
                    u.vars[u.nvars as usize] = slot[j];
                    u.nvars += 1;
                } else {
                    for c in 0..3 {
                        u.fixed[c] += f64::from(px[j * 3 + c]);
                    }
                }
            };
            if x > 0 {
                take(i - 1);
            }
            if x + 1 < wu {
                take(i + 1);
            }
            if y > 0 {
                take(i - wu);
            }
            if y + 1 < hu {
                take(i + wu);
            }
            u.inv_n = 1.0 / f64::from(n);
            u
        })
        .collect();

    let mut cur: Vec<[f64; 3]> = alloc::vec![mean; n_masked];
    let mut next = cur.clone();
    for _ in 0..INPAINT_MAX_ITERS {
        let mut max_change = 0.0f64;
        for (k, u) in unknowns.iter().enumerate() {
            let mut s = u.fixed;
            for &v in &u.vars[..u.nvars as usize] {
                let o = cur[v as usize];
                s[0] += o[0];
                s[1] += o[1];
                s[2] += o[2];
            }
            for c in 0..3 {
                let val = s[c] * u.inv_n;
                max_change = max_change.max((val - cur[k][c]).abs());
                next[k][c] = val;
            }
        }
        core::mem::swap(&mut cur, &mut next);
        if max_change < INPAINT_TOL {
            break;
        }
    }
    let mut out = img.clone();
    let op = out.pixels_mut();
    for (u, v) in unknowns.iter().zip(cur.iter()) {
        for c in 0..3 {
            op[u.index * 3 + c] = math::to_u8(v[c]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorPolicy {
    /// Black on light backgrounds, white on dark ones.
    Auto,
    /// A fixed ink; replaced by `Auto` when it would fall under the contrast
    /// floor.
    Fixed(Rgb),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderStyle {
    pub color: ColorPolicy,
    /// Fraction of the rectified height kept clear on every side, `[0, 0.45]`.
    pub padding: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle { color: ColorPolicy::Auto, padding: 0.0 }
    }
}

/// Returns the ink and whether the policy had to fall back to `Auto`.
pub fn choose_ink(policy: ColorPolicy, bg_luma: f64) -> (Rgb, bool) {
    let auto = if bg_luma >= 128.0 { [0, 0, 0] } else { [255, 255, 255] };
    match policy {
        ColorPolicy::Auto => (auto, false),
        ColorPolicy::Fixed(c) if (luma(c) - bg_luma).abs() >= MIN_CONTRAST => (c, false),
        ColorPolicy::Fixed(_) => (auto, true),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedText {
    /// Solid ink patch, same size as `alpha`.
    pub patch: RasterImage,
    pub alpha: AlphaMask,
    /// Maps the patch rectangle `[0, w] x [0, h]` onto the quad.
    pub placement: Homography,
    pub scale: u32,
    pub ink: Rgb,
    pub ink_fallback: bool,
}

/// Stage three layout: draw `tgt` at the largest integer scale fitting the
/// quad's rectified extent (less padding) and map the patch onto the quad.
pub fn fit_text(
    tgt: &str,
    quad: &Quad,
    glyphs: &dyn GlyphSource,
    style: &RenderStyle,
    bg_luma: f64,
) -> Result<FittedText, VizError> {
    if tgt.is_empty() {
        return Err(VizError::EmptyText);
    }
    let (pw, ph) = rectified_size(quad);
    let pad = math::round(style.padding.clamp(0.0, 0.45) * f64::from(ph)) as u32;
    let (aw, ah) = (pw.saturating_sub(2 * pad), ph.saturating_sub(2 * pad));
    let scale = max_fitting_scale(glyphs, tgt, f64::from(aw), f64::from(ah))
        .ok_or_else(|| VizError::UnrenderableAtMinimumScale(String::from(tgt)))?;
    let alpha = draw_text_alpha(glyphs, tgt, scale, pw, ph, pad, pad, ah);
    let (ink, ink_fallback) = choose_ink(style.color, bg_luma);
    let placement = Homography::from_rect_to_quad(f64::from(pw), f64::from(ph), quad)?;
    Ok(FittedText { patch: RasterImage::new(pw, ph, ink)?, alpha, placement, scale, ink, ink_fallback })
}

/// Fallback layout for text too long for the quad: draw at scale 1 and let
/// the placement squeeze the patch onto the quad.
pub fn fit_text_squeezed(
    tgt: &str,
    quad: &Quad,
    glyphs: &dyn GlyphSource,
    style: &RenderStyle,
    bg_luma: f64,
) -> Result<FittedText, VizError> {
    if tgt.is_empty() {
        return Err(VizError::EmptyText);
    }
    let (pw, ph) = (glyphs.text_width(tgt, 1).max(1), glyphs.line_height(1).max(1));
    let alpha = draw_text_alpha(glyphs, tgt, 1, pw, ph, 0, 0, ph);
    let (ink, ink_fallback) = choose_ink(style.color, bg_luma);
    let placement = Homography::from_rect_to_quad(f64::from(pw), f64::from(ph), quad)?;
    Ok(FittedText { patch: RasterImage::new(pw, ph, ink)?, alpha, placement, scale: 1, ink, ink_fallback })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRegion {
    pub quad: Quad,
    pub mask: AlphaMask,
    pub src_text: String,
    pub tgt_text: String,
}

pub struct TranslationJob<'a> {
    image: RasterImage,
    regions: Vec<TranslationRegion>,
    glyphs: &'a dyn GlyphSource,
    style: RenderStyle,
}

impl<'a> TranslationJob<'a> {
    pub fn new(
        image: RasterImage,
        regions: Vec<TranslationRegion>,
        glyphs: &'a dyn GlyphSource,
        style: RenderStyle,
    ) -> Result<Self, VizError> {
        if regions.is_empty() {
            return Err(VizError::EmptyJob);
        }
        for (k, r) in regions.iter().enumerate() {
            if !r.mask.same_size(&image) {
                return Err(VizError::MaskDimensionMismatch {
                    expected: (image.width(), image.height()),
                    actual: (r.mask.width(), r.mask.height()),
                });
            }
            if let Some((x0, y0, x1, y1)) = r.mask.support_bounds(1) {
                let b = r.quad.bounds().inflate(2.0);
                let inside = f64::from(x0) >= b.x0 && f64::from(y0) >= b.y0 && f64::from(x1) <= b.x1 && f64::from(y1) <= b.y1;
                if !inside {
                    return Err(VizError::MaskOutsideQuad(k));
                }
            }
        }
        Ok(TranslationJob { image, regions, glyphs, style })
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    pub fn regions(&self) -> &[TranslationRegion] {
        &self.regions
    }

    /// Every pixel the job may write: mask support and quad pixels of every
    /// region, dilated by 2 px.
    pub fn touched_set(&self) -> AlphaMask {
        let (w, h) = (self.image.width(), self.image.height());
        let mut m = AlphaMask::new(w, h);
        for r in &self.regions {
            for (d, &s) in m.values_mut().iter_mut().zip(r.mask.values()) {
                if s > 0 {
                    *d = 255;
                }
            }
            for (x, y) in quad_pixels(&r.quad, w, h) {
                m.set(x, y, 255);
            }
        }
        m.dilate(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Fallback {
    /// The fixed ink lacked contrast; automatic ink was used.
    InkColor,
    /// The text did not fit at scale 1 and was squeezed into the quad.
    Squeezed,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionOutcome {
    pub index: usize,
    pub scale: Option<u32>,
    pub ink: Option<Rgb>,
    pub fallbacks: Vec<Fallback>,
    pub error: Option<String>,
}

fn translate_region(img: &mut RasterImage, r: &TranslationRegion, job: &TranslationJob<'_>, out: &mut RegionOutcome) -> Result<(), VizError> {
    *img = inpaint(img, &r.mask)?;
    if r.tgt_text.is_empty() {
        return Ok(());
    }
    let bg = img.mean_luma_in(&r.quad).unwrap_or(128.0);
    let fitted = match fit_text(&r.tgt_text, &r.quad, job.glyphs, &job.style, bg) {
        Ok(f) => f,
        Err(VizError::UnrenderableAtMinimumScale(_)) => {
            out.fallbacks.push(Fallback::Squeezed);
            fit_text_squeezed(&r.tgt_text, &r.quad, job.glyphs, &job.style, bg)?
        }
        Err(e) => return Err(e),
    };
    if fitted.ink_fallback {
        out.fallbacks.push(Fallback::InkColor);
    }
    out.scale = Some(fitted.scale);
    out.ink = Some(fitted.ink);
    let (w, h) = (img.width(), img.height());
    let ink = fitted.ink;
    for_each_warped(&fitted.alpha, &fitted.placement, &r.quad, w, h, true, |x, y, a| {
        let d = img.get(x, y);
        img.put(x, y, blend_pixel(d, ink, a));
    });
    Ok(())
}

/// Run all three stages region by region, in order. Later regions composite
/// over earlier ones. A failing region is reported and skipped.
pub fn translate_image(job: &TranslationJob<'_>) -> (RasterImage, Vec<RegionOutcome>) {
    let mut img = job.image.clone();
    let mut report = Vec::with_capacity(job.regions.len());
    for (index, r) in job.regions.iter().enumerate() {
        let mut outcome = RegionOutcome { index, scale: None, ink: None, fallbacks: Vec::new(), error: None };
        let before = img.clone();
        if let Err(e) = translate_region(&mut img, r, job, &mut outcome) {
            img = before;
            outcome.error = Some(alloc::format!("{e}"));
        }
        report.push(outcome);
    }
    (img, report)
}

/// Number of pixels that differ between `before` and `after` outside
/// `touched`.
pub fn changed_outside(before: &RasterImage, after: &RasterImage, touched: &AlphaMask) -> usize {
    before
        .pixels()
        .chunks_exact(3)
        .zip(after.pixels().chunks_exact(3))
        .zip(touched.values())
        .filter(|((a, b), &t)| t == 0 && a != b)
        .count()
}
