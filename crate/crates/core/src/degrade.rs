//! Seeded visual degradations with exact ground-truth quad transport.
//!
//! Geometric operations (rotate, perspective) move the image through a
//! homography and map every region quad through the same matrix. Photometric
//! operations never touch quads.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::font::GlyphSource;
use crate::geometry::{self, AlphaMask, GeometryError, Homography, Point, Quad, RasterImage, Rect, Rgb};
use crate::math;
use crate::render::{draw_text_alpha, RenderedSample};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegradeError {
    #[error("{kind}: parameter {param} = {value} is outside {min}..={max}")]
    ParamOutOfRange { kind: DegradationKind, param: &'static str, value: f64, min: f64, max: f64 },
    #[error("{kind}: unknown parameter {param:?}")]
    UnknownParam { kind: DegradationKind, param: String },
    #[error("unknown degradation kind {0:?}")]
    UnknownKind(String),
    #[error("geometric warp collapsed a quad or the canvas")]
    DegenerateWarp,
    #[error("chain step {index} ({kind}): {source}")]
    AtStep { index: usize, kind: DegradationKind, source: Box<DegradeError> },
}

impl From<GeometryError> for DegradeError {
    fn from(_: GeometryError) -> Self {
        DegradeError::DegenerateWarp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DegradationKind {
    Blur,
    Rotate,
    Perspective,
    Occlude,
    BlockCompress,
    Resample,
    Contrast,
    Clutter,
}

struct ParamDef {
    name: &'static str,
    min: f64,
    max: f64,
    default: f64,
    integer: bool,
}

const fn p(name: &'static str, min: f64, max: f64, default: f64, integer: bool) -> ParamDef {
    ParamDef { name, min, max, default, integer }
}

impl DegradationKind {
    pub const ALL: [DegradationKind; 8] = [
        DegradationKind::Blur,
        DegradationKind::Rotate,
        DegradationKind::Perspective,
        DegradationKind::Occlude,
        DegradationKind::BlockCompress,
        DegradationKind::Resample,
        DegradationKind::Contrast,
        DegradationKind::Clutter,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DegradationKind::Blur => "blur",
            DegradationKind::Rotate => "rotate",
            DegradationKind::Perspective => "perspective",
            DegradationKind::Occlude => "occlude",
            DegradationKind::BlockCompress => "block_compress",
            DegradationKind::Resample => "resample",
            DegradationKind::Contrast => "contrast",
            DegradationKind::Clutter => "clutter",
        }
    }

    pub fn parse(s: &str) -> Result<Self, DegradeError> {
        DegradationKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| DegradeError::UnknownKind(s.to_string()))
    }

    /// Condition tag used for per-condition reporting.
    pub fn tag(&self) -> &'static str {
        match self {
            DegradationKind::Blur => "blur",
            DegradationKind::Rotate => "rotation",
            DegradationKind::Perspective => "perspective",
            DegradationKind::Occlude => "occlusion",
            DegradationKind::BlockCompress => "compression",
            DegradationKind::Resample => "low_resolution",
            DegradationKind::Contrast => "low_contrast",
            DegradationKind::Clutter => "clutter",
        }
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self, DegradationKind::Rotate | DegradationKind::Perspective)
    }

    fn param(&self) -> ParamDef {
        match self {
            DegradationKind::Blur => p("sigma", 0.0, 8.0, 2.0, false),
            DegradationKind::Rotate => p("angle", -45.0, 45.0, 15.0, false),
            // fraction of min(width, height)
            DegradationKind::Perspective => p("jitter", 0.0, 0.15, 0.05, false),
            DegradationKind::Occlude => p("coverage", 0.0, 0.6, 0.3, false),
            DegradationKind::BlockCompress => p("quality", 1.0, 100.0, 30.0, true),
            DegradationKind::Resample => p("factor", 1.0, 8.0, 2.0, false),
            DegradationKind::Contrast => p("c", 0.0, 1.5, 0.5, false),
            DegradationKind::Clutter => p("n", 0.0, 64.0, 8.0, true),
        }
    }

    /// Name of the single parameter this kind takes.
    pub fn param_name(&self) -> &'static str {
        self.param().name
    }

    pub fn default_value(&self) -> f64 {
        self.param().default
    }

    /// Whether the parameter only takes whole numbers.
    pub fn is_integer(&self) -> bool {
        self.param().integer
    }

    /// Parameter value that makes the operation a no-op, if one exists.
    pub fn identity_value(&self) -> Option<f64> {
        match self {
            DegradationKind::Blur | DegradationKind::Rotate | DegradationKind::Perspective => Some(0.0),
            DegradationKind::Occlude | DegradationKind::Clutter => Some(0.0),
            DegradationKind::Resample | DegradationKind::Contrast => Some(1.0),
            DegradationKind::BlockCompress => None,
        }
    }
}

impl fmt::Display for DegradationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One seeded degradation step.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSpec {
    pub kind: DegradationKind,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl DegradationSpec {
    /// Validates every parameter; missing parameters take their default.
    pub fn new(kind: DegradationKind, params: BTreeMap<String, f64>, seed: u64) -> Result<Self, DegradeError> {
        let spec = DegradationSpec { kind, params, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_value(kind: DegradationKind, value: f64, seed: u64) -> Result<Self, DegradeError> {
        let mut params = BTreeMap::new();
        params.insert(kind.param_name().to_string(), value);
        DegradationSpec::new(kind, params, seed)
    }

    pub fn validate(&self) -> Result<(), DegradeError> {
        let def = self.kind.param();
        for (name, &value) in &self.params {
            if name != def.name {
                return Err(DegradeError::UnknownParam { kind: self.kind, param: name.clone() });
            }
            let integral_ok = !def.integer || value == math::round(value);
            if !(value >= def.min && value <= def.max) || !integral_ok {
                return Err(DegradeError::ParamOutOfRange {
                    kind: self.kind,
                    param: def.name,
                    value,
                    min: def.min,
                    max: def.max,
                });
            }
        }
        Ok(())
    }

    /// The effective parameter value (explicit or default).
    pub fn value(&self) -> f64 {
        let def = self.kind.param();
        self.params.get(def.name).copied().unwrap_or(def.default)
    }
}

/// A rendered sample after zero or more degradations.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradedSample {
    pub sample: RenderedSample,
    pub applied: Vec<DegradationSpec>,
    pub condition_tags: Vec<String>,
    /// Composition of every geometric warp applied so far.
    pub transform: Homography,
    /// Occluder rectangles in the current image frame; cleared by warps.
    occluders: Vec<Rect>,
}

impl DegradedSample {
    pub fn new(sample: RenderedSample) -> Self {
        DegradedSample {
            sample,
            applied: Vec::new(),
            condition_tags: alloc::vec![String::from("clean")],
            transform: Homography::IDENTITY,
            occluders: Vec::new(),
        }
    }

    fn record(&mut self, spec: DegradationSpec) {
        self.applied.push(spec);
        self.condition_tags = condition_tags(&self.applied);
    }
}

/// Tags derived from applied kinds in first-application order; `["clean"]`
/// when nothing was applied.
pub fn condition_tags(applied: &[DegradationSpec]) -> Vec<String> {
    let mut tags: Vec<String> = Vec::new();
    for s in applied {
        let t = s.kind.tag();
        if !tags.iter().any(|x| x == t) {
            tags.push(t.to_string());
        }
    }
    if tags.is_empty() {
        tags.push(String::from("clean"));
    }
    tags
}

fn check_range(kind: DegradationKind, value: f64) -> Result<(), DegradeError> {
    let def = kind.param();
    if value >= def.min && value <= def.max {
        Ok(())
    } else {
        Err(DegradeError::ParamOutOfRange { kind, param: def.name, value, min: def.min, max: def.max })
    }
}

/// Normalized 1-D Gaussian taps of radius `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = math::ceil(3.0 * sigma) as i64;
    let mut w: Vec<f64> = (-r..=r).map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma))).collect();
    let sum: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

/// Separable Gaussian blur with clamp-to-edge borders. One rounding at the
/// end; the intermediate pass stays in f64.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> Result<RasterImage, DegradeError> {
    check_range(DegradationKind::Blur, sigma)?;
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let k = gaussian_kernel(sigma);
    let r = k.len() / 2;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let src = img.pixels();
    // Each output accumulates its taps in kernel order, as a direct
    // convolution would; rows are padded instead of clamping every tap.
    let mut tmp = alloc::vec![0.0f64; src.len()];
    let mut padded = alloc::vec![0.0f64; (w + 2 * r) * 3];
    for y in 0..h {
        let row = &src[y * w * 3..(y + 1) * w * 3];
        for (px, slot) in padded.chunks_exact_mut(3).enumerate() {
            let x = px.saturating_sub(r).min(w - 1);
            for c in 0..3 {
                slot[c] = f64::from(row[x * 3 + c]);
            }
        }
        let acc = &mut tmp[y * w * 3..(y + 1) * w * 3];
        for (t, &wt) in k.iter().enumerate() {
            let taps = &padded[t * 3..t * 3 + w * 3];
            for (a, &v) in acc.iter_mut().zip(taps) {
                *a += wt * v;
            }
        }
    }
    let mut out = img.clone();
    let dst = out.pixels_mut();
    let mut acc = alloc::vec![0.0f64; w * 3];
    for y in 0..h {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (t, &wt) in k.iter().enumerate() {
            let yy = (y + t).saturating_sub(r).min(h - 1);
            let taps = &tmp[yy * w * 3..(yy + 1) * w * 3];
            for (a, &v) in acc.iter_mut().zip(taps) {
                *a += wt * v;
            }
        }
        for (d, &a) in dst[y * w * 3..(y + 1) * w * 3].iter_mut().zip(&acc) {
            *d = math::to_u8(a);
        }
    }
    Ok(out)
}

/// Mid-gray fill for pixels warped in from outside the canvas.
pub const WARP_FILL: Rgb = [128, 128, 128];

/// Warp the image and every region quad through `h`.
pub fn apply_homography(mut s: DegradedSample, h: &Homography) -> Result<DegradedSample, DegradeError> {
    if h.is_identity() {
        return Ok(s);
    }
    let img = &s.sample.image;
    let (w, ht) = (img.width(), img.height());
    let mut regions = s.sample.regions.clone();
    for r in regions.iter_mut() {
        r.quad = r.quad.transform(h).map_err(|_| DegradeError::DegenerateWarp)?;
        let b = r.quad.bounds();
        if b.x0 < 0.0 || b.y0 < 0.0 || b.x1 > f64::from(w) || b.y1 > f64::from(ht) {
            r.clipped = true;
        }
    }
    s.sample.image = geometry::warp_image(img, h, w, ht, WARP_FILL);
    s.sample.regions = regions;
    s.transform = h.compose(&s.transform);
    s.occluders.clear();
    Ok(s)
}

/// Rotation by `angle_deg` degrees about the image center.
pub fn rotation_homography(angle_deg: f64, w: u32, h: u32) -> Homography {
    if angle_deg == 0.0 {
        return Homography::IDENTITY;
    }
    let rad = angle_deg * core::f64::consts::PI / 180.0;
    Homography::rotation_about(rad, f64::from(w) / 2.0, f64::from(h) / 2.0)
}

/// Canvas corners moved by independent uniform offsets in
/// `±jitter · min(w, h)` per axis, mapped back onto the canvas corners.
pub fn perspective_homography(jitter: f64, w: u32, h: u32, rng: &mut Rng) -> Result<Homography, DegradeError> {
    if jitter == 0.0 {
        return Ok(Homography::IDENTITY);
    }
    let (fw, fh) = (f64::from(w), f64::from(h));
    let d = jitter * fw.min(fh);
    let canvas = Quad::from_rect(0.0, 0.0, fw, fh)?;
    let mut moved = [Point::default(); 4];
    for (m, c) in moved.iter_mut().zip(canvas.corners().iter()) {
        *m = Point::new(c.x + rng.uniform(-d, d), c.y + rng.uniform(-d, d));
    }
    let dst = Quad::new(moved).map_err(|_| DegradeError::DegenerateWarp)?;
    Homography::from_quads(&canvas, &dst).map_err(|_| DegradeError::DegenerateWarp)
}

/// Rotate or perspective-warp according to `spec`.
pub fn geometric_warp(s: DegradedSample, spec: &DegradationSpec, rng: &mut Rng) -> Result<DegradedSample, DegradeError> {
    spec.validate()?;
    let (w, h) = (s.sample.image.width(), s.sample.image.height());
    let hom = match spec.kind {
        DegradationKind::Rotate => rotation_homography(spec.value(), w, h),
        DegradationKind::Perspective => perspective_homography(spec.value(), w, h, rng)?,
        _ => return Ok(s),
    };
    apply_homography(s, &hom)
}

/// Exact area of `quad ∩ (union of rects)` divided by the quad's area.
pub fn union_coverage(quad: &Quad, rects: &[Rect]) -> f64 {
    let area = quad.area();
    if rects.is_empty() || area <= 0.0 {
        return 0.0;
    }
    // Decompose the union into disjoint grid cells over all rect edges.
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut covered = 0.0;
    for j in 0..ys.len().saturating_sub(1) {
        let (y0, y1) = (ys[j], ys[j + 1]);
        let cy = (y0 + y1) / 2.0;
        // merge horizontal runs of covered cells
        let mut run: Option<f64> = None;
        for i in 0..xs.len() - 1 {
            let cx = (xs[i] + xs[i + 1]) / 2.0;
            let hit = rects.iter().any(|r| cx > r.x0 && cx < r.x1 && cy > r.y0 && cy < r.y1);
            match (hit, run) {
                (true, None) => run = Some(xs[i]),
                (false, Some(x0)) => {
                    covered += quad.intersection_area(&Rect::new(x0, y0, xs[i], y1));
                    run = None;
                }
                _ => {}
            }
        }
        if let Some(x0) = run {
            covered += quad.intersection_area(&Rect::new(x0, y0, xs[xs.len() - 1], y1));
        }
    }
    (covered / area).clamp(0.0, 1.0)
}

const MAX_OCCLUDERS_PER_REGION: usize = 64;

/// Paint opaque rectangles over randomly chosen regions until each target's
/// covered fraction reaches `coverage` (or 64 rectangles were tried). Every
/// region's `occluded_fraction` becomes the exact covered area ratio of all
/// occluders painted since the last geometric warp, and never decreases.
pub fn occlude(mut s: DegradedSample, coverage: f64, rng: &mut Rng) -> Result<DegradedSample, DegradeError> {
    check_range(DegradationKind::Occlude, coverage)?;
    if coverage == 0.0 || s.sample.regions.is_empty() {
        return Ok(s);
    }
    let (w, h) = (s.sample.image.width(), s.sample.image.height());
    let canvas = Rect::new(0.0, 0.0, f64::from(w), f64::from(h));
    let n = s.sample.regions.len();
    let mut targets: Vec<usize> = (0..n).filter(|_| rng.chance(0.5)).collect();
    if targets.is_empty() {
        targets.push(rng.index(n));
    }
    for t in targets {
        let quad = s.sample.regions[t].quad;
        let Some(b) = quad.bounds().intersection(&canvas) else { continue };
        for _ in 0..MAX_OCCLUDERS_PER_REGION {
            if union_coverage(&quad, &s.occluders) >= coverage {
                break;
            }
            let rw = b.width() * rng.uniform(0.25, 0.6);
            let rh = b.height() * rng.uniform(0.6, 1.2);
            let x = rng.uniform(b.x0 - rw / 2.0, b.x1 - rw / 2.0);
            let y = rng.uniform(b.y0 - rh / 2.0, b.y1 - rh / 2.0);
            let r = Rect::new(math::round(x), math::round(y), math::round(x + rw), math::round(y + rh));
            let Some(r) = r.intersection(&canvas) else { continue };
            paint_occluder(&mut s.sample.image, &r, rng);
            s.occluders.push(r);
        }
    }
    for region in s.sample.regions.iter_mut() {
        let f = union_coverage(&region.quad, &s.occluders);
        region.occluded_fraction = region.occluded_fraction.max(f);
    }
    Ok(s)
}

fn paint_occluder(img: &mut RasterImage, r: &Rect, rng: &mut Rng) {
    let base = [rng.below(256) as u8, rng.below(256) as u8, rng.below(256) as u8];
    let noisy = rng.chance(0.5);
    let Some((x0, y0, x1, y1)) = r.pixel_span(img.width(), img.height()) else { return };
    for y in y0..y1 {
        for x in x0..x1 {
            let c = if noisy {
                let j = rng.range_i64(-32, 32);
                [
                    (i64::from(base[0]) + j).clamp(0, 255) as u8,
                    (i64::from(base[1]) + j).clamp(0, 255) as u8,
                    (i64::from(base[2]) + j).clamp(0, 255) as u8,
                ]
            } else {
                base
            };
            img.put(x, y, c);
        }
    }
}

/// Standard JPEG luminance quantization table, row-major.
pub const JPEG_LUMA_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Quality-scaled divisors, each at least 1.
pub fn quant_divisors(quality: u8) -> [f64; 64] {
    let q = f64::from(quality.clamp(1, 100));
    let s = if q < 50.0 { 5000.0 / q } else { 200.0 - 2.0 * q } / 100.0;
    let mut d = [1.0; 64];
    for (o, &t) in d.iter_mut().zip(JPEG_LUMA_TABLE.iter()) {
        *o = math::round(f64::from(t) * s).max(1.0);
    }
    d
}

/// Orthonormal 8-point DCT-II basis: `basis[u][x] = C(u)/2 · cos((2x+1)uπ/16)`.
fn dct_basis() -> [[f64; 8]; 8] {
    let mut b = [[0.0; 8]; 8];
    for (u, row) in b.iter_mut().enumerate() {
        let cu = if u == 0 { core::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        for (x, v) in row.iter_mut().enumerate() {
            *v = cu / 2.0 * math::cos((2 * x + 1) as f64 * u as f64 * core::f64::consts::PI / 16.0);
        }
    }
    b
}

/// JPEG-style block quantization: per channel and 8x8 tile, level shift,
/// DCT-II, quantize/dequantize, inverse DCT, unshift, clamp. Edge tiles read
/// clamp-padded pixels.
pub fn block_compress(img: &RasterImage, quality: u8) -> Result<RasterImage, DegradeError> {
    check_range(DegradationKind::BlockCompress, f64::from(quality))?;
    let div = quant_divisors(quality);
    let basis = dct_basis();
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    let mut coef = [[0.0f64; 8]; 8];
    for ty in (0..h).step_by(8) {
        for tx in (0..w).step_by(8) {
            for c in 0..3 {
                for (y, row) in block.iter_mut().enumerate() {
                    let sy = (ty + y as u32).min(h - 1);
                    for (x, v) in row.iter_mut().enumerate() {
                        let sx = (tx + x as u32).min(w - 1);
                        *v = f64::from(img.get(sx, sy)[c]) - 128.0;
                    }
                }
                // rows then columns
                for y in 0..8 {
                    for u in 0..8 {
                        tmp[y][u] = (0..8).map(|x| basis[u][x] * block[y][x]).sum();
                    }
                }
                for v in 0..8 {
                    for u in 0..8 {
                        let f: f64 = (0..8).map(|y| basis[v][y] * tmp[y][u]).sum();
                        let d = div[v * 8 + u];
                        coef[v][u] = math::round(f / d) * d;
                    }
                }
                for y in 0..8 {
                    for u in 0..8 {
                        tmp[y][u] = (0..8).map(|v| basis[v][y] * coef[v][u]).sum();
                    }
                }
                for y in 0..8u32 {
                    let oy = ty + y;
                    if oy >= h {
                        break;
                    }
                    for x in 0..8u32 {
                        let ox = tx + x;
                        if ox >= w {
                            break;
                        }
                        let val: f64 = (0..8).map(|u| basis[u][x as usize] * tmp[y as usize][u]).sum();
                        let mut px = out.get(ox, oy);
                        px[c] = math::to_u8(val + 128.0);
                        out.put(ox, oy, px);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Bilinear downscale by `factor`, then bilinear upscale to the original size.
pub fn resample(img: &RasterImage, factor: f64) -> Result<RasterImage, DegradeError> {
    check_range(DegradationKind::Resample, factor)?;
    if factor == 1.0 {
        return Ok(img.clone());
    }
    let dw = math::round(f64::from(img.width()) / factor).max(1.0) as u32;
    let dh = math::round(f64::from(img.height()) / factor).max(1.0) as u32;
    let small = geometry::resize_bilinear(img, dw, dh);
    Ok(geometry::resize_bilinear(&small, img.width(), img.height()))
}

/// `out = round((in − 128) · c + 128)` per channel.
pub fn adjust_contrast(img: &RasterImage, c: f64) -> Result<RasterImage, DegradeError> {
    check_range(DegradationKind::Contrast, c)?;
    if c == 1.0 {
        return Ok(img.clone());
    }
    let mut lut = [0u8; 256];
    for (i, v) in lut.iter_mut().enumerate() {
        *v = math::to_u8((i as f64 - 128.0) * c + 128.0);
    }
    let mut out = img.clone();
    for v in out.pixels_mut() {
        *v = lut[*v as usize];
    }
    Ok(out)
}

const CLUTTER_ATTEMPTS: u32 = 1000;
const CLUTTER_CHARS: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZ0123456789#*+-/%";

/// Draw up to `n` distractors (boxes, bars, short strings) whose bounding
/// boxes stay at least 1 px clear of every region quad's bounding box.
/// Placements that fail 1000 times are dropped.
pub fn add_clutter(mut s: DegradedSample, n: u32, glyphs: &dyn GlyphSource, rng: &mut Rng) -> Result<DegradedSample, DegradeError> {
    check_range(DegradationKind::Clutter, f64::from(n))?;
    let (w, h) = (s.sample.image.width(), s.sample.image.height());
    let forbidden: Vec<Rect> = s.sample.regions.iter().map(|r| r.quad.bounds()).collect();
    let blocked = |r: &Rect| {
        forbidden.iter().any(|f| {
            // compare on the pixel grid the quad touches, plus one pixel
            let f = Rect::new(math::floor(f.x0), math::floor(f.y0), math::ceil(f.x1), math::ceil(f.y1)).inflate(1.0);
            f.intersects(r)
        })
    };
    for _ in 0..n {
        let kind = rng.index(3);
        let color = [rng.below(256) as u8, rng.below(256) as u8, rng.below(256) as u8];
        let (ew, eh, text) = match kind {
            2 => {
                let len = 2 + rng.index(4);
                let text: String = (0..len).map(|_| CLUTTER_CHARS[rng.index(CLUTTER_CHARS.len())] as char).collect();
                let scale = 1 + rng.below(2) as u32;
                (glyphs.text_width(&text, scale), glyphs.line_height(scale), Some((text, scale)))
            }
            _ => (4 + rng.below(37) as u32, 4 + rng.below(37) as u32, None),
        };
        if ew >= w || eh >= h {
            continue;
        }
        let mut placed = None;
        for _ in 0..CLUTTER_ATTEMPTS {
            let x = rng.below(u64::from(w - ew)) as u32;
            let y = rng.below(u64::from(h - eh)) as u32;
            let r = Rect::new(f64::from(x), f64::from(y), f64::from(x + ew), f64::from(y + eh));
            if !blocked(&r) {
                placed = Some((x, y));
                break;
            }
        }
        let Some((x, y)) = placed else { continue };
        let img = &mut s.sample.image;
        match (kind, text) {
            (2, Some((text, scale))) => {
                let alpha: AlphaMask = draw_text_alpha(glyphs, &text, scale, ew, eh, 0, 0, eh);
                for yy in 0..eh {
                    for xx in 0..ew {
                        if alpha.get(xx, yy) > 0 {
                            img.put(x + xx, y + yy, color);
                        }
                    }
                }
            }
            (0, _) => {
                for yy in y..y + eh {
                    for xx in x..x + ew {
                        img.put(xx, yy, color);
                    }
                }
            }
            _ => {
                // diagonal bar, 2 px thick, inside its box
                let steps = ew.max(eh) * 2;
                for i in 0..=steps {
                    let t = f64::from(i) / f64::from(steps);
                    let px = x + (t * f64::from(ew - 1)) as u32;
                    let py = y + (t * f64::from(eh - 1)) as u32;
                    img.put(px, py, color);
                    if px + 1 < x + ew {
                        img.put(px + 1, py, color);
                    }
                }
            }
        }
    }
    Ok(s)
}

/// Apply one spec, using an Rng seeded from the spec's own seed.
pub fn apply_spec(s: DegradedSample, spec: &DegradationSpec, glyphs: &dyn GlyphSource) -> Result<DegradedSample, DegradeError> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let v = spec.value();
    let mut s = match spec.kind {
        DegradationKind::Rotate | DegradationKind::Perspective => geometric_warp(s, spec, &mut rng)?,
        DegradationKind::Occlude => occlude(s, v, &mut rng)?,
        DegradationKind::Clutter => add_clutter(s, v as u32, glyphs, &mut rng)?,
        DegradationKind::Blur => {
            let mut s = s;
            s.sample.image = gaussian_blur(&s.sample.image, v)?;
            s
        }
        DegradationKind::BlockCompress => {
            let mut s = s;
            s.sample.image = block_compress(&s.sample.image, v as u8)?;
            s
        }
        DegradationKind::Resample => {
            let mut s = s;
            s.sample.image = resample(&s.sample.image, v)?;
            s
        }
        DegradationKind::Contrast => {
            let mut s = s;
            s.sample.image = adjust_contrast(&s.sample.image, v)?;
            s
        }
    };
    s.record(spec.clone());
    Ok(s)
}

/// Apply `chain` in order. The first failing step aborts with its index.
pub fn apply_chain(
    sample: RenderedSample,
    chain: &[DegradationSpec],
    glyphs: &dyn GlyphSource,
) -> Result<DegradedSample, DegradeError> {
    let mut s = DegradedSample::new(sample);
    for (index, spec) in chain.iter().enumerate() {
        s = apply_spec(s, spec, glyphs)
            .map_err(|e| DegradeError::AtStep { index, kind: spec.kind, source: Box::new(e) })?;
    }
    Ok(s)
}
