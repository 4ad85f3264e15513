// Thin wrappers so call sites read like the std float API.

// Below 2^52 in magnitude a cast truncates exactly, and the fractional part
// of a double is exact, so these agree with libm bit for bit.
const CAST_EXACT: f64 = 4_503_599_627_370_496.0;

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    if x.abs() < CAST_EXACT {
        let t = x as i64 as f64;
        let d = x - t;
        let r = if d >= 0.5 {
            t + 1.0
        } else if d <= -0.5 {
            t - 1.0
        } else {
            t
        };
        libm::copysign(r, x)
    } else {
        libm::round(x)
    }
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    if x.abs() < CAST_EXACT {
        let t = x as i64 as f64;
        let r = if t > x { t - 1.0 } else { t };
        libm::copysign(r, x)
    } else {
        libm::floor(x)
    }
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    -floor(-x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Round half away from zero, then clamp into `0..=255`.
#[inline]
pub(crate) fn to_u8(x: f64) -> u8 {
    if !(x > 0.0) {
        0
    } else if x >= 254.5 {
        255
    } else {
        let t = x as u8;
        if x - f64::from(t) >= 0.5 {
            t + 1
        } else {
            t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_paths_match_libm() {
        let mut v = [0.0f64, -0.0, 0.5, -0.5, 1.5, -1.5, 2.5, 0.49999999999999994, -0.49999999999999994, 254.5, 254.49999999999997,
            1e15 + 0.5, -1e15 - 0.5, 4.6e15, -7.25, 1e300, f64::MIN_POSITIVE, -3.0]
        .to_vec();
        let mut z = 12345u64;
        for _ in 0..100_000 {
            z = z.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            v.push(((z >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 700.0);
        }
        for x in v {
            assert_eq!(round(x).to_bits(), libm::round(x).to_bits(), "round {x}");
            assert_eq!(floor(x).to_bits(), libm::floor(x).to_bits(), "floor {x}");
            assert_eq!(ceil(x).to_bits(), libm::ceil(x).to_bits(), "ceil {x}");
            let r = libm::round(x);
            let want = if r.is_nan() || r <= 0.0 { 0 } else if r >= 255.0 { 255 } else { r as u8 };
            assert_eq!(to_u8(x), want, "to_u8 {x}");
        }
        assert_eq!(to_u8(f64::NAN), 0);
    }
}
