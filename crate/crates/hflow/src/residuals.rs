//! Optimality diagnostics of a surface: the inner-variation stationarity
//! residual over a shipped test family, and the weak Neumann residual probed
//! with monotone boundary perturbations.

use crate::curvature::PrescribedCurvature;
use crate::curve::JordanCurve;
use crate::energy::{f_gradient_with_rate, inner_variation_residual};
use crate::mesh::DiskMesh;
use crate::monotone::project_monotone;
use crate::obstacle::Obstacle;
use crate::state::{anchor_locks, boundary_weights, SurfaceState};
use crate::v3::{self, V2, V3};
use std::f64::consts::TAU;

/// One admissible inner-variation field with its normalization.
pub struct TestField {
    pub label: String,
    pub eta: Vec<V2>,
    /// 1 + the W^{1,infinity} size of the field.
    pub norm: f64,
}

fn w1inf(mesh: &DiskMesh, eta: &[V2]) -> f64 {
    let sup = eta.iter().map(|e| f64::hypot(e[0], e[1])).fold(0.0, f64::max);
    let mut grad: f64 = 0.0;
    for t in 0..mesh.triangles.len() {
        let (e1, e2) = mesh.p1_gradient_2d(eta, t);
        let g = (e1[0] * e1[0] + e1[1] * e1[1] + e2[0] * e2[0] + e2[1] * e2[1]).sqrt();
        grad = grad.max(g);
    }
    sup + grad
}

/// The shipped family: tangential trigonometric boundary fields vanishing at
/// the three anchors, extended over the disk, plus interior tent bumps on a
/// coarse lattice in both coordinate directions.
pub fn standard_field_family(mesh: &DiskMesh) -> Vec<TestField> {
    let mut fields = Vec::new();
    let tangential: [(&str, fn(f64) -> f64); 4] = [
        ("sin(3t) tangential", |t| (3.0 * t).sin()),
        ("1-cos(3t) tangential", |t| 1.0 - (3.0 * t).cos()),
        ("sin(6t) tangential", |t| (6.0 * t).sin()),
        ("sin(t)+sin(2t) tangential", |t| t.sin() + (2.0 * t).sin()),
    ];
    for (label, s) in tangential {
        let eta: Vec<V2> = mesh
            .vertices
            .iter()
            .map(|p| {
                let theta = p[1].atan2(p[0]);
                let a = s(theta);
                [-a * p[1], a * p[0]]
            })
            .collect();
        fields.push(named_field(mesh, label, eta));
    }
    let centers: [V2; 9] = [
        [0.0, 0.0],
        [0.45, 0.0],
        [-0.45, 0.0],
        [0.0, 0.45],
        [0.0, -0.45],
        [0.35, 0.35],
        [-0.35, 0.35],
        [0.35, -0.35],
        [-0.35, -0.35],
    ];
    for (ci, c) in centers.iter().enumerate() {
        for (di, dir) in [[1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
            let eta: Vec<V2> = mesh
                .vertices
                .iter()
                .map(|p| {
                    let d = f64::hypot(p[0] - c[0], p[1] - c[1]);
                    let t = (1.0 - d / 0.3).max(0.0);
                    [t * dir[0], t * dir[1]]
                })
                .collect();
            fields.push(named_field(mesh, &format!("tent {ci} e{}", di + 1), eta));
        }
    }
    fields
}

fn named_field(mesh: &DiskMesh, label: &str, eta: Vec<V2>) -> TestField {
    let norm = 1.0 + w1inf(mesh, &eta);
    TestField { label: label.into(), eta, norm }
}

/// Normalized worst inner-variation pairing over the family. `f` is the rate
/// term paired with Du (the backward difference of the step, or zero).
pub fn stationarity_residual(
    mesh: &DiskMesh,
    u: &[V3],
    f: &[V3],
    family: &[TestField],
) -> f64 {
    family
        .iter()
        .map(|tf| {
            let v = inner_variation_residual(mesh, u, f, &tf.eta)
                .expect("shipped family fields are admissible");
            v.abs() / tf.norm
        })
        .fold(0.0, f64::max)
}

/// Directional first variations along feasible monotone phase perturbations:
/// the positive part of the descent rate, maximized over the probe family
/// and normalized by the realized-boundary metric. Near zero exactly at the
/// constrained KKT points.
pub fn neumann_residual(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    state: &SurfaceState,
    u: &[V3],
    f: &[V3],
    n_test: usize,
) -> f64 {
    let _ = obstacle;
    let n = mesh.n_boundary;
    let locks = anchor_locks(mesh, curve);
    let weights = boundary_weights(mesh);
    let g = f_gradient_with_rate(mesh, u, f, h_field);
    // phase-space gradient and metric on the boundary block
    let mut g_phi = vec![0.0; n];
    let mut metric = vec![0.0; n];
    for j in 0..n {
        let tangent = curve.eval_d1(state.phases[j]);
        g_phi[j] = v3::dot(g[j], tangent);
        metric[j] = weights[j] * v3::dot(tangent, tangent);
    }
    let m_norm = |d: &[f64]| -> f64 {
        d.iter().zip(&metric).map(|(x, m)| m * x * x).sum::<f64>().sqrt()
    };
    let mut worst: f64 = 0.0;
    let mut probe = |psi: &[f64]| {
        let d: Vec<f64> = psi.iter().zip(&state.phases).map(|(a, b)| a - b).collect();
        let nn = m_norm(&d);
        if nn > 1e-14 {
            let rate: f64 = g_phi.iter().zip(&d).map(|(a, b)| a * b).sum();
            worst = worst.max(-rate / nn);
        }
    };
    // sliding single-window bumps, alternating sign
    let windows = n_test.max(2) / 2;
    for k in 0..windows {
        let theta_c = TAU * (k as f64 + 0.5) / windows as f64;
        for sign in [1.0, -1.0] {
            let bumped: Vec<f64> = (0..n)
                .map(|j| {
                    let theta = mesh.boundary_loop[j].1;
                    let mut delta = (theta - theta_c).rem_euclid(TAU);
                    if delta > TAU / 2.0 {
                        delta -= TAU;
                    }
                    let width = TAU / 6.0;
                    let b = if delta.abs() < width / 2.0 {
                        let c = (std::f64::consts::PI * delta / width).cos();
                        0.1 * c * c
                    } else {
                        0.0
                    };
                    state.phases[j] + sign * b
                })
                .collect();
            if let Ok(psi) = project_monotone(&bumped, &weights, &locks) {
                probe(&psi);
            }
        }
    }
    // projected steepest-descent probes catch whatever the windows miss
    for beta in [0.01, 0.1, 1.0] {
        let moved: Vec<f64> = (0..n)
            .map(|j| state.phases[j] - beta * g_phi[j] / metric[j].max(1e-300))
            .collect();
        if let Ok(psi) = project_monotone(&moved, &weights, &locks) {
            probe(&psi);
        }
    }
    worst
}
