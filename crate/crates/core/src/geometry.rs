//! Projective geometry, raster buffers, warping and alpha compositing.
//!
//! Coordinates are continuous pixel-edge coordinates: pixel `(i, j)` covers
//! `[i, i + 1) x [j, j + 1)` and its center sits at `(i + 0.5, j + 0.5)`.
//! Every float to `u8` conversion rounds half away from zero, then clamps.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// An 8-bit RGB color.
pub type Rgb = [u8; 3];

/// Rec. 601 luma of a color, in `0.0..=255.0`.
#[inline]
pub fn luma(c: Rgb) -> f64 {
    0.299 * f64::from(c[0]) + 0.587 * f64::from(c[1]) + 0.114 * f64::from(c[2])
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate quad: the 4-point system is singular")]
    DegenerateQuad,
    #[error("invalid quad: {0}")]
    InvalidQuad(&'static str),
    #[error("homography is not invertible")]
    NotInvertible,
    #[error("point maps to infinity")]
    PointAtInfinity,
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("buffer length {actual} does not match {expected}")]
    BufferLength { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)` in continuous coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        );
        (r.x0 < r.x1 && r.y0 < r.y1).then_some(r)
    }

    /// Grow by `d` on every side.
    pub fn inflate(&self, d: f64) -> Rect {
        Rect::new(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)
    }

    /// Integer pixel span `[x0, x1) x [y0, y1)` covering the rectangle,
    /// clipped to a `width x height` canvas. `None` when empty.
    pub fn pixel_span(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        let x0 = math::floor(self.x0).max(0.0);
        let y0 = math::floor(self.y0).max(0.0);
        let x1 = math::ceil(self.x1).min(f64::from(width));
        let y1 = math::ceil(self.y1).min(f64::from(height));
        (x0 < x1 && y0 < y1).then(|| (x0 as u32, y0 as u32, x1 as u32, y1 as u32))
    }
}

/// Ordered quadrilateral: top-left, top-right, bottom-right, bottom-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    corners: [Point; 4],
}

impl Quad {
    pub fn new(corners: [Point; 4]) -> Result<Self, GeometryError> {
        if corners.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidQuad("non-finite corner"));
        }
        if polygon_signed_area(&corners) <= 0.0 {
            return Err(GeometryError::InvalidQuad("signed area is not positive"));
        }
        let [a, b, c, d] = corners;
        if segments_cross(a, b, c, d) || segments_cross(b, c, d, a) {
            return Err(GeometryError::InvalidQuad("self-intersecting"));
        }
        Ok(Quad { corners })
    }

    pub fn from_rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Quad::new([
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn corners(&self) -> &[Point; 4] {
        &self.corners
    }

    pub fn area(&self) -> f64 {
        polygon_signed_area(&self.corners)
    }

    pub fn bounds(&self) -> Rect {
        let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.corners {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    pub fn is_axis_aligned(&self) -> bool {
        let [a, b, c, d] = self.corners;
        a.y == b.y && c.y == d.y && a.x == d.x && b.x == c.x
    }

    /// Mean of the top and bottom edge lengths.
    pub fn rectified_width(&self) -> f64 {
        let [a, b, c, d] = self.corners;
        (a.distance(b) + d.distance(c)) / 2.0
    }

    /// Mean of the left and right edge lengths.
    pub fn rectified_height(&self) -> f64 {
        let [a, b, c, d] = self.corners;
        (a.distance(d) + b.distance(c)) / 2.0
    }

    /// Point-in-polygon by crossing number; points on the boundary may land
    /// on either side.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        let n = self.corners.len();
        let mut j = n - 1;
        for i in 0..n {
            let (pi, pj) = (self.corners[i], self.corners[j]);
            if (pi.y > p.y) != (pj.y > p.y) {
                let x = (pj.x - pi.x) * (p.y - pi.y) / (pj.y - pi.y) + pi.x;
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Map every corner through `h`.
    pub fn transform(&self, h: &Homography) -> Result<Quad, GeometryError> {
        let mut out = [Point::default(); 4];
        for (o, p) in out.iter_mut().zip(self.corners.iter()) {
            *o = h.apply(*p)?;
        }
        Quad::new(out)
    }

    /// Exact area of the intersection with an axis-aligned rectangle.
    pub fn intersection_area(&self, rect: &Rect) -> f64 {
        let clipped = clip_polygon_to_rect(&self.corners, rect);
        polygon_signed_area(&clipped).abs()
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Shoelace area; positive for clockwise-on-screen (y down) ordering.
pub fn polygon_signed_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

/// Sutherland-Hodgman clip of an arbitrary polygon against a rectangle.
pub fn clip_polygon_to_rect(poly: &[Point], rect: &Rect) -> Vec<Point> {
    let mut out: Vec<Point> = poly.to_vec();
    // (axis, bound, keep_greater)
    let planes = [(0, rect.x0, true), (0, rect.x1, false), (1, rect.y0, true), (1, rect.y1, false)];
    for (axis, bound, keep_greater) in planes {
        if out.is_empty() {
            break;
        }
        let coord = |p: &Point| if axis == 0 { p.x } else { p.y };
        let inside = |p: &Point| if keep_greater { coord(p) >= bound } else { coord(p) <= bound };
        let input = core::mem::take(&mut out);
        for i in 0..input.len() {
            let cur = input[i];
            let prev = input[(i + input.len() - 1) % input.len()];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - coord(&prev)) / (coord(&cur) - coord(&prev));
                let mut p = Point::new(prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y));
                if axis == 0 {
                    p.x = bound;
                } else {
                    p.y = bound;
                }
                out.push(p);
            }
            if ci {
                out.push(cur);
            }
        }
    }
    out
}

/// Row-major 3x3 projective transform, normalized so `m[8] == 1` whenever
/// that entry is nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [f64; 9],
}

impl Homography {
    pub const IDENTITY: Homography = Homography {
        m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
    };

    pub fn new(m: [f64; 9]) -> Result<Self, GeometryError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NotInvertible);
        }
        let m = normalize(m);
        let det = det3(&m);
        if det == 0.0 || !det.is_finite() {
            return Err(GeometryError::NotInvertible);
        }
        Ok(Homography { m })
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            m: [1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0],
        }
    }

    pub fn scale(sx: f64, sy: f64) -> Result<Self, GeometryError> {
        Homography::new([sx, 0.0, 0.0, 0.0, sy, 0.0, 0.0, 0.0, 1.0])
    }

    /// Rotation by `radians` about `(cx, cy)`. With y pointing down a positive
    /// angle turns clockwise on screen.
    pub fn rotation_about(radians: f64, cx: f64, cy: f64) -> Self {
        let (s, c) = (math::sin(radians), math::cos(radians));
        Homography {
            m: [c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy, 0.0, 0.0, 1.0],
        }
    }

    pub fn matrix(&self) -> &[f64; 9] {
        &self.m
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.m)
    }

    /// Solve the 4-point correspondence `src[i] -> dst[i]`.
    ///
    /// Both quads are first moved to zero centroid and unit-ish spread, so
    /// the 8x8 elimination stays well conditioned at any pixel scale.
    pub fn from_quads(src: &Quad, dst: &Quad) -> Result<Self, GeometryError> {
        let (ts, _) = conditioning(src.corners());
        let (td, td_inv) = conditioning(dst.corners());
        let mut a = [[0.0f64; 9]; 8];
        for i in 0..4 {
            let p = apply_raw(&ts, src.corners()[i]);
            let q = apply_raw(&td, dst.corners()[i]);
            a[2 * i] = [p.x, p.y, 1.0, 0.0, 0.0, 0.0, -q.x * p.x, -q.x * p.y, q.x];
            a[2 * i + 1] = [0.0, 0.0, 0.0, p.x, p.y, 1.0, -q.y * p.x, -q.y * p.y, q.y];
        }
        let h = solve8(a).ok_or(GeometryError::DegenerateQuad)?;
        let hn = [h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0];
        let full = mul3(&td_inv, &mul3(&hn, &ts));
        Homography::new(full).map_err(|_| GeometryError::DegenerateQuad)
    }

    /// Map the axis-aligned rectangle `[0, w] x [0, h]` onto `dst`. When `dst`
    /// is itself axis-aligned the result is an exact scale plus translation.
    pub fn from_rect_to_quad(w: f64, h: f64, dst: &Quad) -> Result<Self, GeometryError> {
        if dst.is_axis_aligned() {
            let [a, b, _, d] = *dst.corners();
            return Homography::new([
                (b.x - a.x) / w,
                0.0,
                a.x,
                0.0,
                (d.y - a.y) / h,
                a.y,
                0.0,
                0.0,
                1.0,
            ]);
        }
        let src = Quad::from_rect(0.0, 0.0, w, h)?;
        Homography::from_quads(&src, dst)
    }

    pub fn apply(&self, p: Point) -> Result<Point, GeometryError> {
        let m = &self.m;
        let w = m[6] * p.x + m[7] * p.y + m[8];
        if w.abs() < 1e-12 {
            return Err(GeometryError::PointAtInfinity);
        }
        Ok(Point::new(
            (m[0] * p.x + m[1] * p.y + m[2]) / w,
            (m[3] * p.x + m[4] * p.y + m[5]) / w,
        ))
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Homography) -> Homography {
        let m = normalize(mul3(&self.m, &other.m));
        Homography { m }
    }

    pub fn invert(&self) -> Homography {
        let m = &self.m;
        let det = det3(m);
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        let mut inv = [0.0; 9];
        for (o, a) in inv.iter_mut().zip(adj.iter()) {
            *o = a / det;
        }
        Homography { m: normalize(inv) }
    }

    pub fn is_identity(&self) -> bool {
        self.m == Self::IDENTITY.m
    }
}

fn normalize(mut m: [f64; 9]) -> [f64; 9] {
    if m[8] != 0.0 && m[8] != 1.0 {
        let s = m[8];
        for v in m.iter_mut() {
            *v /= s;
        }
        m[8] = 1.0;
    }
    m
}

fn det3(m: &[f64; 9]) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

fn mul3(a: &[f64; 9], b: &[f64; 9]) -> [f64; 9] {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[r * 3 + c] = (0..3).map(|k| a[r * 3 + k] * b[k * 3 + c]).sum();
        }
    }
    out
}

fn apply_raw(m: &[f64; 9], p: Point) -> Point {
    let w = m[6] * p.x + m[7] * p.y + m[8];
    Point::new((m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w)
}

/// Similarity moving the points to zero centroid and mean distance sqrt(2).
fn conditioning(pts: &[Point; 4]) -> ([f64; 9], [f64; 9]) {
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let d = pts.iter().map(|p| math::hypot(p.x - cx, p.y - cy)).sum::<f64>() / 4.0;
    let s = if d > 0.0 { core::f64::consts::SQRT_2 / d } else { 1.0 };
    (
        [s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0],
        [1.0 / s, 0.0, cx, 0.0, 1.0 / s, cy, 0.0, 0.0, 1.0],
    )
}

/// Gaussian elimination with partial pivoting on an augmented 8x9 system.
fn solve8(mut a: [[f64; 9]; 8]) -> Option<[f64; 8]> {
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..9 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = [0.0; 8];
    for row in (0..8).rev() {
        let s: f64 = (row + 1..8).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][8] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Owned row-major RGB8 image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Result<Self, GeometryError> {
        check_dims(width, height)?;
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&fill);
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, GeometryError> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(GeometryError::BufferLength { expected, actual: pixels.len() });
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, c: Rgb) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// Mean luma over the pixels whose centers lie inside `quad`; falls back
    /// to the quad's clipped bounding span when no center is inside.
    pub fn mean_luma_in(&self, quad: &Quad) -> Option<f64> {
        let (x0, y0, x1, y1) = quad.bounds().pixel_span(self.width, self.height)?;
        let (mut sum, mut n, mut box_sum) = (0.0, 0usize, 0.0);
        for y in y0..y1 {
            for x in x0..x1 {
                let l = luma(self.get(x, y));
                box_sum += l;
                if quad.contains(Point::new(f64::from(x) + 0.5, f64::from(y) + 0.5)) {
                    sum += l;
                    n += 1;
                }
            }
        }
        if n > 0 {
            Some(sum / n as f64)
        } else {
            Some(box_sum / (f64::from(x1 - x0) * f64::from(y1 - y0)))
        }
    }

    /// Bilinear sample at continuous pixel-edge coordinates with clamp-to-edge
    /// taps. Returns floats so callers choose when to round.
    pub fn sample_clamped(&self, sx: f64, sy: f64) -> [f64; 3] {
        let u = sx - 0.5;
        let v = sy - 0.5;
        let fx0 = math::floor(u);
        let fy0 = math::floor(v);
        let ax = u - fx0;
        let ay = v - fy0;
        let maxx = i64::from(self.width) - 1;
        let maxy = i64::from(self.height) - 1;
        let x0 = (fx0 as i64).clamp(0, maxx) as u32;
        let x1 = (fx0 as i64 + 1).clamp(0, maxx) as u32;
        let y0 = (fy0 as i64).clamp(0, maxy) as u32;
        let y1 = (fy0 as i64 + 1).clamp(0, maxy) as u32;
        let (p00, p10, p01, p11) = (self.get(x0, y0), self.get(x1, y0), self.get(x0, y1), self.get(x1, y1));
        let mut out = [0.0; 3];
        for c in 0..3 {
            let top = lerp(f64::from(p00[c]), f64::from(p10[c]), ax);
            let bot = lerp(f64::from(p01[c]), f64::from(p11[c]), ax);
            out[c] = lerp(top, bot, ay);
        }
        out
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a * (1.0 - t) + b * t
    }
}

fn check_dims(width: u32, height: u32) -> Result<(), GeometryError> {
    if width == 0 || height == 0 {
        Err(GeometryError::InvalidDimensions { width, height })
    } else {
        Ok(())
    }
}

/// Single-channel coverage mask; 0 is background, 255 is fully text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlphaMask {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl AlphaMask {
    /// An all-zero mask. Zero-sized masks are allowed (empty glyphs).
    pub fn new(width: u32, height: u32) -> Self {
        AlphaMask { width, height, values: vec![0; width as usize * height as usize] }
    }

    pub fn from_raw(width: u32, height: u32, values: Vec<u8>) -> Result<Self, GeometryError> {
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(GeometryError::BufferLength { expected, actual: values.len() });
        }
        Ok(AlphaMask { width, height, values })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [u8] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.values[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn same_size(&self, img: &RasterImage) -> bool {
        self.width == img.width() && self.height == img.height()
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// Pixel bounds `(x0, y0, x1, y1)` (exclusive max) of values `>= threshold`.
    pub fn support_bounds(&self, threshold: u8) -> Option<(u32, u32, u32, u32)> {
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) >= threshold.max(1) {
                    b = Some(match b {
                        None => (x, y, x + 1, y + 1),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1)),
                    });
                }
            }
        }
        b
    }

    /// Binary square dilation: output is 255 wherever any pixel within
    /// Chebyshev distance `radius` is nonzero.
    pub fn dilate(&self, radius: u32) -> AlphaMask {
        let (w, h) = (self.width as i64, self.height as i64);
        let r = i64::from(radius);
        // Horizontal then vertical pass of a max filter.
        let mut tmp = AlphaMask::new(self.width, self.height);
        for y in 0..h {
            for x in 0..w {
                let hit = (x - r..=x + r).filter(|&xx| xx >= 0 && xx < w).any(|xx| self.get(xx as u32, y as u32) != 0);
                if hit {
                    tmp.set(x as u32, y as u32, 255);
                }
            }
        }
        let mut out = AlphaMask::new(self.width, self.height);
        for y in 0..h {
            for x in 0..w {
                let hit = (y - r..=y + r).filter(|&yy| yy >= 0 && yy < h).any(|yy| tmp.get(x as u32, yy as u32) != 0);
                if hit {
                    out.set(x as u32, y as u32, 255);
                }
            }
        }
        out
    }

    /// Bilinear alpha sample; taps outside the mask count as 0.
    pub fn sample_transparent(&self, sx: f64, sy: f64) -> f64 {
        if self.width == 0 || self.height == 0 {
            return 0.0;
        }
        let u = sx - 0.5;
        let v = sy - 0.5;
        let fx0 = math::floor(u);
        let fy0 = math::floor(v);
        let ax = u - fx0;
        let ay = v - fy0;
        let tap = |x: f64, y: f64| -> f64 {
            if x < 0.0 || y < 0.0 || x >= f64::from(self.width) || y >= f64::from(self.height) {
                0.0
            } else {
                f64::from(self.get(x as u32, y as u32))
            }
        };
        let top = lerp(tap(fx0, fy0), tap(fx0 + 1.0, fy0), ax);
        let bot = lerp(tap(fx0, fy0 + 1.0), tap(fx0 + 1.0, fy0 + 1.0), ax);
        lerp(top, bot, ay)
    }
}

/// Inverse-mapping warp with bilinear sampling. Each output pixel center is
/// pulled back through `h⁻¹`; samples falling outside the source image take
/// `fill`.
pub fn warp_image(img: &RasterImage, h: &Homography, out_w: u32, out_h: u32, fill: Rgb) -> RasterImage {
    let inv = h.invert();
    let m = inv.matrix();
    let (sw, sh) = (f64::from(img.width()), f64::from(img.height()));
    let mut out = RasterImage {
        width: out_w.max(1),
        height: out_h.max(1),
        pixels: vec![0; out_w.max(1) as usize * out_h.max(1) as usize * 3],
    };
    let (iw, ih) = (img.width as usize, img.height as usize);
    let src = &img.pixels;
    let dst = &mut out.pixels;
    let mut o = 0;
    for y in 0..out.height {
        let py = f64::from(y) + 0.5;
        for x in 0..out.width {
            let px = f64::from(x) + 0.5;
            let w = m[6] * px + m[7] * py + m[8];
            let mut c = fill;
            if w.abs() >= 1e-12 {
                let sx = (m[0] * px + m[1] * py + m[2]) / w;
                let sy = (m[3] * px + m[4] * py + m[5]) / w;
                if sx >= 0.0 && sy >= 0.0 && sx <= sw && sy <= sh {
                    // same taps and weights as `sample_clamped`
                    let (u, v) = (sx - 0.5, sy - 0.5);
                    let (fx0, fy0) = (math::floor(u), math::floor(v));
                    let (ax, ay) = (u - fx0, v - fy0);
                    let x0 = (fx0 as i64).clamp(0, iw as i64 - 1) as usize;
                    let x1 = (fx0 as i64 + 1).clamp(0, iw as i64 - 1) as usize;
                    let y0 = (fy0 as i64).clamp(0, ih as i64 - 1) as usize;
                    let y1 = (fy0 as i64 + 1).clamp(0, ih as i64 - 1) as usize;
                    let (r0, r1) = (y0 * iw, y1 * iw);
                    for (k, ch) in c.iter_mut().enumerate() {
                        let at = |i: usize| f64::from(src[i * 3 + k]);
                        let top = lerp(at(r0 + x0), at(r0 + x1), ax);
                        let bot = lerp(at(r1 + x0), at(r1 + x1), ax);
                        *ch = math::to_u8(lerp(top, bot, ay));
                    }
                }
            }
            dst[o..o + 3].copy_from_slice(&c);
            o += 3;
        }
    }
    out
}

/// Bilinear resize to `new_w x new_h` (pixel-center aligned, clamped taps).
pub fn resize_bilinear(img: &RasterImage, new_w: u32, new_h: u32) -> RasterImage {
    let (new_w, new_h) = (new_w.max(1), new_h.max(1));
    if new_w == img.width() && new_h == img.height() {
        return img.clone();
    }
    let sx = f64::from(img.width()) / f64::from(new_w);
    let sy = f64::from(img.height()) / f64::from(new_h);
    let mut out = RasterImage {
        width: new_w,
        height: new_h,
        pixels: vec![0; new_w as usize * new_h as usize * 3],
    };
    for y in 0..new_h {
        let cy = (f64::from(y) + 0.5) * sy;
        for x in 0..new_w {
            let cx = (f64::from(x) + 0.5) * sx;
            let s = img.sample_clamped(cx, cy);
            out.put(x, y, [math::to_u8(s[0]), math::to_u8(s[1]), math::to_u8(s[2])]);
        }
    }
    out
}

/// Composite `src` over `dst` with `mask` as coverage, `src`'s top-left at
/// integer `origin`. Pixels outside the overlap are copied from `dst`.
pub fn alpha_blend(dst: &RasterImage, src: &RasterImage, mask: &AlphaMask, origin: (i64, i64)) -> RasterImage {
    let mut out = dst.clone();
    blend_into(&mut out, src, mask, origin);
    out
}

/// In-place form of [`alpha_blend`].
pub fn blend_into(dst: &mut RasterImage, src: &RasterImage, mask: &AlphaMask, origin: (i64, i64)) {
    let w = i64::from(src.width().min(mask.width()));
    let h = i64::from(src.height().min(mask.height()));
    let (ox, oy) = origin;
    let x_start = ox.max(0);
    let y_start = oy.max(0);
    let x_end = (ox + w).min(i64::from(dst.width()));
    let y_end = (oy + h).min(i64::from(dst.height()));
    for y in y_start..y_end {
        for x in x_start..x_end {
            let (sx, sy) = ((x - ox) as u32, (y - oy) as u32);
            let a = mask.get(sx, sy);
            if a == 0 {
                continue;
            }
            let s = src.get(sx, sy);
            let d = dst.get(x as u32, y as u32);
            dst.put(x as u32, y as u32, blend_pixel(d, s, a));
        }
    }
}

/// `round((α·src + (255 − α)·dst) / 255)` per channel, in integers.
#[inline]
pub fn blend_pixel(dst: Rgb, src: Rgb, alpha: u8) -> Rgb {
    let a = u32::from(alpha);
    let mut out = [0u8; 3];
    for c in 0..3 {
        let n = a * u32::from(src[c]) + (255 - a) * u32::from(dst[c]);
        // Half-up on a nonnegative numerator is half away from zero.
        out[c] = ((2 * n + 255) / 510) as u8;
    }
    out
}
