//! The prescribed mean curvature field H and its declared bounds.

use crate::v3::{self, V3};
use std::sync::Arc;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CurvatureError {
    #[error("radial curvature table must contain at least one entry")]
    EmptyTable,
    #[error("radial curvature table radii must be finite, nonnegative and strictly increasing")]
    BadTable,
}

/// Bounded continuous H. Checkers rely on `sup_bound` being a true upper
/// bound for |H|; for the closed-form variants it is computed, for callbacks
/// it is declared by the caller and only spot-checked.
#[derive(Clone)]
pub enum PrescribedCurvature {
    Constant(f64),
    Radial { center: V3, table: Vec<(f64, f64)> },
    Callback { eval: Arc<dyn Fn(V3) -> f64 + Send + Sync>, sup_bound: f64 },
}

impl std::fmt::Debug for PrescribedCurvature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrescribedCurvature::Constant(h) => write!(f, "Constant({h})"),
            PrescribedCurvature::Radial { center, table } => {
                write!(f, "Radial {{ center: {center:?}, table: {table:?} }}")
            }
            PrescribedCurvature::Callback { sup_bound, .. } => {
                write!(f, "Callback {{ sup_bound: {sup_bound} }}")
            }
        }
    }
}

impl PrescribedCurvature {
    pub fn radial(center: V3, table: Vec<(f64, f64)>) -> Result<Self, CurvatureError> {
        if table.is_empty() {
            return Err(CurvatureError::EmptyTable);
        }
        let ok = table.iter().all(|(r, h)| r.is_finite() && *r >= 0.0 && h.is_finite())
            && table.windows(2).all(|w| w[0].0 < w[1].0);
        if !ok {
            return Err(CurvatureError::BadTable);
        }
        Ok(PrescribedCurvature::Radial { center, table })
    }

    pub fn eval(&self, p: V3) -> f64 {
        match self {
            PrescribedCurvature::Constant(h) => *h,
            PrescribedCurvature::Radial { center, table } => {
                profile_eval(table, v3::dist(p, *center))
            }
            PrescribedCurvature::Callback { eval, .. } => eval(p),
        }
    }

    /// Declared/derived bound for sup |H| over all of space.
    pub fn sup_bound(&self) -> f64 {
        match self {
            PrescribedCurvature::Constant(h) => h.abs(),
            PrescribedCurvature::Radial { table, .. } => {
                table.iter().fold(0.0, |m, (_, h)| m.max(h.abs()))
            }
            PrescribedCurvature::Callback { sup_bound, .. } => *sup_bound,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, PrescribedCurvature::Constant(_))
    }

    pub fn is_zero(&self) -> bool {
        self.sup_bound() == 0.0
    }

    /// Radial profile (center, table) when H depends on |x - center| only.
    pub fn radial_profile(&self) -> Option<(V3, &[(f64, f64)])> {
        match self {
            PrescribedCurvature::Radial { center, table } => Some((*center, table)),
            _ => None,
        }
    }
}

/// Clamped piecewise-linear interpolation of the table at radius `r`.
pub fn profile_eval(table: &[(f64, f64)], r: f64) -> f64 {
    let (r0, h0) = table[0];
    if r <= r0 {
        return h0;
    }
    let (rn, hn) = *table.last().unwrap();
    if r >= rn {
        return hn;
    }
    let k = table.partition_point(|(t, _)| *t <= r);
    let (ra, ha) = table[k - 1];
    let (rb, hb) = table[k];
    ha + (hb - ha) * (r - ra) / (rb - ra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field() {
        let h = PrescribedCurvature::Constant(-0.7);
        assert_eq!(h.eval([3.0, 1.0, -2.0]), -0.7);
        assert_eq!(h.sup_bound(), 0.7);
        assert!(!h.is_zero());
        assert!(PrescribedCurvature::Constant(0.0).is_zero());
    }

    #[test]
    fn radial_interpolation_and_clamping() {
        let h = PrescribedCurvature::radial(
            [4.0, 0.0, 0.0],
            vec![(2.0, 0.55), (6.0, 0.45)],
        )
        .unwrap();
        // at the disk center: r = 4, halfway through the table
        assert!((h.eval([0.0, 0.0, 0.0]) - 0.5).abs() < 1e-15);
        // inside the first radius: clamp
        assert_eq!(h.eval([4.0, 1.0, 0.0]), 0.55);
        // beyond the last radius: clamp
        assert_eq!(h.eval([20.0, 0.0, 0.0]), 0.45);
        assert_eq!(h.sup_bound(), 0.55);

        // three-node table, interior segment
        let g = PrescribedCurvature::radial([0.0; 3], vec![(0.0, 1.0), (1.0, 0.0), (2.0, -1.0)])
            .unwrap();
        assert!((g.eval([1.5, 0.0, 0.0]) + 0.5).abs() < 1e-15);
        assert_eq!(g.sup_bound(), 1.0);
    }

    #[test]
    fn callback_field() {
        let h = PrescribedCurvature::Callback {
            eval: Arc::new(|p: V3| 0.3 * (p[2]).tanh()),
            sup_bound: 0.3,
        };
        assert!((h.eval([0.0, 0.0, 100.0]) - 0.3).abs() < 1e-9);
        assert_eq!(h.sup_bound(), 0.3);
        // declared bound really dominates on a sample sweep
        for i in 0..100 {
            let p = [i as f64 * 0.3 - 15.0, (i as f64).sin(), i as f64 - 50.0];
            assert!(h.eval(p).abs() <= h.sup_bound() + 1e-15);
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(
            PrescribedCurvature::radial([0.0; 3], vec![]),
            Err(CurvatureError::EmptyTable)
        );
        assert_eq!(
            PrescribedCurvature::radial([0.0; 3], vec![(1.0, 0.5), (1.0, 0.6)]),
            Err(CurvatureError::BadTable)
        );
        assert_eq!(
            PrescribedCurvature::radial([0.0; 3], vec![(-1.0, 0.5)]),
            Err(CurvatureError::BadTable)
        );
    }
}

impl PartialEq for PrescribedCurvature {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PrescribedCurvature::Constant(a), PrescribedCurvature::Constant(b)) => a == b,
            (
                PrescribedCurvature::Radial { center: ca, table: ta },
                PrescribedCurvature::Radial { center: cb, table: tb },
            ) => ca == cb && ta == tb,
            _ => false,
        }
    }
}
