//! The convex constraint set that surfaces must stay inside.

use crate::v3::{self, V3};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ObstacleError {
    #[error("point is not on the obstacle boundary")]
    NotOnBoundary,
    #[error("the unconstrained obstacle has no boundary")]
    NoBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Obstacle {
    /// No constraint. Forces the unbounded-energy bookkeeping downstream.
    AllSpace,
    Ball { center: V3, radius: f64 },
}

impl Obstacle {
    pub fn contains(&self, p: V3) -> bool {
        match self {
            Obstacle::AllSpace => true,
            Obstacle::Ball { center, radius } => v3::dist(p, *center) <= radius + 1e-12,
        }
    }

    /// Nearest point of the set; identity on members.
    pub fn project(&self, p: V3) -> V3 {
        match self {
            Obstacle::AllSpace => p,
            Obstacle::Ball { center, radius } => {
                let d = v3::sub(p, *center);
                let n = v3::norm(d);
                if n <= *radius {
                    p
                } else {
                    v3::axpy(*center, radius / n, d)
                }
            }
        }
    }

    pub fn dist(&self, p: V3) -> f64 {
        v3::dist(p, self.project(p))
    }

    /// Minimum principal curvature of the boundary at `a`.
    pub fn min_principal_curvature(&self, a: V3) -> Result<f64, ObstacleError> {
        match self {
            Obstacle::AllSpace => Err(ObstacleError::NoBoundary),
            Obstacle::Ball { center, radius } => {
                if (v3::dist(a, *center) - radius).abs() > 1e-9 {
                    Err(ObstacleError::NotOnBoundary)
                } else {
                    Ok(1.0 / radius)
                }
            }
        }
    }
}
