//! The boundary contour: a periodic cubic spline through cyclic samples.
//!
//! The spline is parametrized over [0, 2π) with equispaced knots, so phase
//! values play the role of the curve parameter everywhere else in the
//! solver. Three anchor samples are distinguished; boundary phases of a
//! surface are pinned to them at the mesh anchor vertices.

use crate::v3::{self, V3};
use serde::Deserialize;
use std::f64::consts::TAU;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CurveError {
    #[error("need at least 8 sample points, got {0}")]
    TooFewPoints(usize),
    #[error("anchor indices must be three distinct in-range samples")]
    BadAnchors,
    #[error("curve fails the injectivity sampling check: {0}")]
    SelfIntersecting(String),
    #[error("parametrization is degenerate: min |gamma'| = {0:.3e}")]
    Degenerate(f64),
    #[error("curve file: {0}")]
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanCurve {
    pub control_points: Vec<V3>,
    /// Second derivatives of the periodic interpolating spline at the knots.
    spline_m: Vec<V3>,
    /// Phases of the three anchors, strictly increasing in [0, 2π).
    pub anchor_phases: [f64; 3],
    pub anchor_points: [V3; 3],
}

/// Chord-arc sampling summary: every sampled pair with chord length at most
/// `delta` has (shorter arc)/(chord) at most `m_ratio`.
#[derive(Debug, Clone, Copy)]
pub struct ChordArcReport {
    pub delta: f64,
    pub m_ratio: f64,
}

/// Cyclic tridiagonal solve (constant sub/super diagonal `off`, constant
/// diagonal `diag`) by rank-one correction of an ordinary tridiagonal system.
fn solve_cyclic_tridiag(diag: f64, off: f64, d: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert!(n >= 3);
    let gamma = -diag;
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - off * off / gamma;

    let thomas = |b: &[f64], rhs: &[f64]| -> Vec<f64> {
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        c_prime[0] = off / b[0];
        d_prime[0] = rhs[0] / b[0];
        for i in 1..n {
            let m = b[i] - off * c_prime[i - 1];
            c_prime[i] = off / m;
            d_prime[i] = (rhs[i] - off * d_prime[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d_prime[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d_prime[i] - c_prime[i] * x[i + 1];
        }
        x
    };

    let y = thomas(&b, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = thomas(&b, &u);
    // v = (1, 0, ..., 0, off/gamma)
    let vy = y[0] + off / gamma * y[n - 1];
    let vz = z[0] + off / gamma * z[n - 1];
    let factor = vy / (1.0 + vz);
    (0..n).map(|i| y[i] - factor * z[i]).collect()
}

pub fn curve_from_samples(points: &[V3], anchors: [usize; 3]) -> Result<JordanCurve, CurveError> {
    let m = points.len();
    if m < 8 {
        return Err(CurveError::TooFewPoints(m));
    }
    let mut idx = anchors;
    idx.sort_unstable();
    if idx[0] == idx[1] || idx[1] == idx[2] || idx[2] >= m {
        return Err(CurveError::BadAnchors);
    }

    let diameter = {
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                d = d.max(v3::dist(points[i], points[j]));
            }
        }
        d
    };
    if diameter <= 0.0 {
        return Err(CurveError::SelfIntersecting("all points coincide".into()));
    }
    for i in 0..m {
        for j in i + 1..m {
            if v3::dist(points[i], points[j]) < 1e-12 * diameter {
                return Err(CurveError::SelfIntersecting(format!(
                    "samples {i} and {j} coincide"
                )));
            }
        }
    }

    // periodic natural cubic spline: solve for knot second derivatives
    let dt = TAU / m as f64;
    let mut spline_m = vec![[0.0; 3]; m];
    for c in 0..3 {
        let rhs: Vec<f64> = (0..m)
            .map(|i| {
                let prev = points[(i + m - 1) % m][c];
                let next = points[(i + 1) % m][c];
                (next - 2.0 * points[i][c] + prev) / dt
            })
            .collect();
        let sol = solve_cyclic_tridiag(2.0 * dt / 3.0, dt / 6.0, &rhs);
        for i in 0..m {
            spline_m[i][c] = sol[i];
        }
    }

    let anchor_phases = [
        TAU * idx[0] as f64 / m as f64,
        TAU * idx[1] as f64 / m as f64,
        TAU * idx[2] as f64 / m as f64,
    ];
    let curve = JordanCurve {
        control_points: points.to_vec(),
        spline_m,
        anchor_phases,
        anchor_points: [points[idx[0]], points[idx[1]], points[idx[2]]],
    };

    // regularity and injectivity on a fine sampling
    let ns = 2048;
    let mut min_speed = f64::INFINITY;
    let samples: Vec<V3> = (0..ns)
        .map(|i| {
            let phi = TAU * i as f64 / ns as f64;
            min_speed = min_speed.min(v3::norm(curve.eval_d1(phi)));
            curve.eval(phi)
        })
        .collect();
    if min_speed < 1e-9 * diameter {
        return Err(CurveError::Degenerate(min_speed));
    }
    // distant parameter values must not map to nearby points
    let guard = ns / 8;
    for i in 0..ns {
        for j in i + 1..ns {
            let gap = (j - i).min(ns - (j - i));
            if gap > guard && v3::dist(samples[i], samples[j]) < 1e-6 * diameter {
                return Err(CurveError::SelfIntersecting(format!(
                    "phases {:.4} and {:.4} nearly coincide",
                    TAU * i as f64 / ns as f64,
                    TAU * j as f64 / ns as f64
                )));
            }
        }
    }

    Ok(curve)
}

impl JordanCurve {
    fn segment(&self, phi: f64) -> (usize, usize, f64, f64, f64) {
        let m = self.control_points.len();
        let dt = TAU / m as f64;
        let mut p = phi % TAU;
        if p < 0.0 {
            p += TAU;
        }
        let mut i = (p / dt) as usize;
        if i >= m {
            i = m - 1;
        }
        let t0 = i as f64 * dt;
        // local coordinates within the segment
        let a = t0 + dt - p;
        let b = p - t0;
        (i, (i + 1) % m, a, b, dt)
    }

    /// Point on the curve at phase `phi` (any real; 2π-periodic).
    pub fn eval(&self, phi: f64) -> V3 {
        let (i, j, a, b, dt) = self.segment(phi);
        let (pi, pj) = (self.control_points[i], self.control_points[j]);
        let (mi, mj) = (self.spline_m[i], self.spline_m[j]);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = mi[c] * a * a * a / (6.0 * dt)
                + mj[c] * b * b * b / (6.0 * dt)
                + (pi[c] / dt - mi[c] * dt / 6.0) * a
                + (pj[c] / dt - mj[c] * dt / 6.0) * b;
        }
        out
    }

    /// First derivative of the spline with respect to phase.
    pub fn eval_d1(&self, phi: f64) -> V3 {
        let (i, j, a, b, dt) = self.segment(phi);
        let (pi, pj) = (self.control_points[i], self.control_points[j]);
        let (mi, mj) = (self.spline_m[i], self.spline_m[j]);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = -mi[c] * a * a / (2.0 * dt) + mj[c] * b * b / (2.0 * dt)
                - (pi[c] / dt - mi[c] * dt / 6.0)
                + (pj[c] / dt - mj[c] * dt / 6.0);
        }
        out
    }

    /// Second derivative of the spline with respect to phase.
    pub fn eval_d2(&self, phi: f64) -> V3 {
        let (i, j, a, b, dt) = self.segment(phi);
        let (mi, mj) = (self.spline_m[i], self.spline_m[j]);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = mi[c] * a / dt + mj[c] * b / dt;
        }
        out
    }

    pub fn diameter(&self) -> f64 {
        let m = self.control_points.len();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                d = d.max(v3::dist(self.control_points[i], self.control_points[j]));
            }
        }
        d
    }
}

/// Chord-arc sweep without a chord cap: `delta` is the largest sampled chord
/// length for which every pair at or below it keeps arc/chord <= 100.
pub fn chord_arc(curve: &JordanCurve, n_samples: usize) -> ChordArcReport {
    assert!(n_samples >= 64, "chord_arc needs at least 64 samples");
    chord_arc_with_cap(curve, n_samples, None)
}

/// Same sweep restricted to pairs with chord length at most `cap`.
pub fn chord_arc_with_cap(
    curve: &JordanCurve,
    n_samples: usize,
    cap: Option<f64>,
) -> ChordArcReport {
    let n = n_samples;
    let pts: Vec<V3> = (0..n).map(|i| curve.eval(TAU * i as f64 / n as f64)).collect();
    // cumulative arc length at the sample phases, Simpson on each gap
    let mut cum = vec![0.0; n + 1];
    for i in 0..n {
        let t0 = TAU * i as f64 / n as f64;
        let t1 = TAU * (i + 1) as f64 / n as f64;
        let tm = 0.5 * (t0 + t1);
        let seg = (t1 - t0) / 6.0
            * (v3::norm(curve.eval_d1(t0))
                + 4.0 * v3::norm(curve.eval_d1(tm))
                + v3::norm(curve.eval_d1(t1)));
        cum[i + 1] = cum[i] + seg;
    }
    let total = cum[n];

    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let chord = v3::dist(pts[i], pts[j]);
            if chord < 1e-12 {
                continue;
            }
            if let Some(c) = cap {
                if chord > c {
                    continue;
                }
            }
            let arc = (cum[j] - cum[i]).min(total - (cum[j] - cum[i]));
            pairs.push((chord, arc / chord));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut m_ratio: f64 = 1.0;
    let mut delta = 0.0;
    for (chord, ratio) in pairs {
        if m_ratio.max(ratio) > 100.0 {
            break;
        }
        m_ratio = m_ratio.max(ratio);
        delta = chord;
    }
    ChordArcReport { delta, m_ratio }
}

/// `m` equispaced points on the unit circle in the z = 0 plane.
pub fn circle_points(m: usize) -> Vec<V3> {
    (0..m)
        .map(|i| {
            let a = TAU * i as f64 / m as f64;
            [a.cos(), a.sin(), 0.0]
        })
        .collect()
}

/// The unit circle through `m` equispaced samples, anchored at phases
/// 0, 2π/3, 4π/3. `m` must be at least 9 and divisible by 3.
pub fn circle_samples(m: usize) -> JordanCurve {
    assert!(m >= 9 && m % 3 == 0);
    curve_from_samples(&circle_points(m), [0, m / 3, 2 * m / 3])
        .expect("the sampled unit circle is a valid Jordan curve")
}

#[derive(Deserialize)]
struct CurveFile {
    points: Vec<V3>,
    anchors: [usize; 3],
}

/// Load a curve from a JSON file with fields `points` and `anchors`.
pub fn curve_from_file(path: &std::path::Path) -> Result<JordanCurve, CurveError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CurveError::File(format!("{}: {e}", path.display())))?;
    let parsed: CurveFile = serde_json::from_str(&text)
        .map_err(|e| CurveError::File(format!("{}: {e}", path.display())))?;
    curve_from_samples(&parsed.points, parsed.anchors)
}
