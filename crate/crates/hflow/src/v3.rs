//! Tiny fixed-size vector helpers shared by the geometry modules.

pub type V3 = [f64; 3];
pub type V2 = [f64; 2];

#[inline]
pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: V3, b: V3) -> f64 {
    norm(sub(a, b))
}

/// a + s*b in one pass.
#[inline]
pub fn axpy(a: V3, s: f64, b: V3) -> V3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

/// (1-s)*a + s*b.
#[inline]
pub fn lerp(a: V3, b: V3, s: f64) -> V3 {
    [
        a[0] + s * (b[0] - a[0]),
        a[1] + s * (b[1] - a[1]),
        a[2] + s * (b[2] - a[2]),
    ]
}

/// Barycentric combination b0*p + b1*q + b2*r.
#[inline]
pub fn bary(p: V3, q: V3, r: V3, b: [f64; 3]) -> V3 {
    [
        b[0] * p[0] + b[1] * q[0] + b[2] * r[0],
        b[0] * p[1] + b[1] * q[1] + b[2] * r[1],
        b[0] * p[2] + b[1] * q[2] + b[2] * r[2],
    ]
}

/// Neumaier-compensated sum. The line search compares energy values whose
/// difference can sit near rounding level, so plain accumulation over a few
/// thousand terms would drown real descent in summation noise.
pub fn compensated_sum(vals: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut comp = 0.0;
    for &v in vals {
        let t = s + v;
        comp += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + comp
}
