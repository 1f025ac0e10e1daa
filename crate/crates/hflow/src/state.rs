//! The constrained degrees of freedom of a surface: interior positions plus
//! a monotone boundary phase vector with three locked anchors.

use crate::curve::JordanCurve;
use crate::energy::dirichlet_gradient;
use crate::mesh::DiskMesh;
use crate::obstacle::Obstacle;
use crate::v3::{self, V3};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StateError {
    #[error("state has {got} interior values and {phases} phases, mesh wants {want_interior}/{want_phases}")]
    WrongSize { got: usize, phases: usize, want_interior: usize, want_phases: usize },
    #[error("anchor phase at boundary vertex {vertex} is {got}, locked value is {want}")]
    InfeasibleAnchors { vertex: usize, got: f64, want: f64 },
    #[error("phases decrease at boundary position {at}")]
    NotMonotone { at: usize },
    #[error("vertex {vertex} lies outside the obstacle")]
    ObstacleViolation { vertex: usize },
}

/// Interior vertex positions (mesh order, after the boundary block) plus the
/// per-boundary-vertex phase. Phases are stored as one nondecreasing lift
/// starting at the first anchor value and bounded by it plus 2*pi.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceState {
    pub interior: Vec<V3>,
    pub phases: Vec<f64>,
}

/// The three (boundary index, locked phase) pairs: mesh anchor vertices in
/// index order 0, N/3, 2N/3 against the curve's sorted anchor phases.
pub fn anchor_locks(mesh: &DiskMesh, curve: &JordanCurve) -> [(usize, f64); 3] {
    let n = mesh.n_boundary;
    let a = curve.anchor_phases;
    [(0, a[0]), (n / 3, a[1]), (2 * n / 3, a[2])]
}

/// Boundary lumped masses in boundary-loop order; the weights of the
/// isotonic projection.
pub fn boundary_weights(mesh: &DiskMesh) -> Vec<f64> {
    mesh.boundary_loop
        .iter()
        .map(|&(i, _)| mesh.lumped_mass[i])
        .collect()
}

/// Phases that spread each boundary arc linearly between its anchor values.
/// For the default circle curve this is the identity parametrization.
pub fn canonical_phases(mesh: &DiskMesh, curve: &JordanCurve) -> Vec<f64> {
    let n = mesh.n_boundary;
    let [a1, a2, a3] = curve.anchor_phases;
    let ends = [a1, a2, a3, a1 + std::f64::consts::TAU];
    let third = n / 3;
    (0..n)
        .map(|j| {
            let (arc, rem) = (j / third, j % third);
            let t = rem as f64 / third as f64;
            ends[arc] + t * (ends[arc + 1] - ends[arc])
        })
        .collect()
}

impl SurfaceState {
    /// Feasibility check against the mesh, curve and obstacle.
    pub fn validate(
        &self,
        mesh: &DiskMesh,
        curve: &JordanCurve,
        obstacle: &Obstacle,
    ) -> Result<(), StateError> {
        let n = mesh.n_boundary;
        let ni = mesh.vertex_count() - n;
        if self.interior.len() != ni || self.phases.len() != n {
            return Err(StateError::WrongSize {
                got: self.interior.len(),
                phases: self.phases.len(),
                want_interior: ni,
                want_phases: n,
            });
        }
        for (vertex, want) in anchor_locks(mesh, curve) {
            let got = self.phases[vertex];
            if (got - want).abs() > 1e-12 {
                return Err(StateError::InfeasibleAnchors { vertex, got, want });
            }
        }
        let tau = std::f64::consts::TAU;
        for j in 0..n {
            let next = if j + 1 == n { self.phases[0] + tau } else { self.phases[j + 1] };
            if next < self.phases[j] - 1e-12 {
                return Err(StateError::NotMonotone { at: j });
            }
        }
        for (k, p) in self.interior.iter().enumerate() {
            if !obstacle.contains(*p) {
                return Err(StateError::ObstacleViolation { vertex: n + k });
            }
        }
        for j in 0..n {
            if !obstacle.contains(curve.eval(self.phases[j])) {
                return Err(StateError::ObstacleViolation { vertex: j });
            }
        }
        Ok(())
    }

    /// The realized surface: boundary vertices through the curve, interior
    /// copied. Validates the state first.
    pub fn realize(
        &self,
        mesh: &DiskMesh,
        curve: &JordanCurve,
        obstacle: &Obstacle,
    ) -> Result<Vec<V3>, StateError> {
        self.validate(mesh, curve, obstacle)?;
        Ok(self.realize_unchecked(mesh, curve))
    }

    /// Realization without the feasibility check, for inner loops that
    /// construct feasible states by projection.
    pub fn realize_unchecked(&self, mesh: &DiskMesh, curve: &JordanCurve) -> Vec<V3> {
        let n = mesh.n_boundary;
        let mut u = Vec::with_capacity(mesh.vertex_count());
        for j in 0..n {
            u.push(curve.eval(self.phases[j]));
        }
        u.extend_from_slice(&self.interior);
        u
    }
}

/// Conjugate gradients on the interior block of the stiffness matrix:
/// discrete-harmonic extension of the given boundary positions.
pub fn harmonic_interior(mesh: &DiskMesh, boundary: &[V3]) -> Vec<V3> {
    let n = mesh.n_boundary;
    let nv = mesh.vertex_count();
    let ni = nv - n;
    assert_eq!(boundary.len(), n);
    if ni == 0 {
        return Vec::new();
    }
    // K acting on interior values with the boundary block fixed at zero
    let apply = |x: &[V3]| -> Vec<V3> {
        let mut full = vec![[0.0; 3]; nv];
        full[n..].copy_from_slice(x);
        let g = dirichlet_gradient(mesh, &full);
        g[n..].to_vec()
    };
    // right-hand side: -K_IB * boundary
    let mut full = vec![[0.0; 3]; nv];
    full[..n].copy_from_slice(boundary);
    let g = dirichlet_gradient(mesh, &full);
    let b: Vec<V3> = g[n..].iter().map(|v| v3::scale(*v, -1.0)).collect();

    let dot = |a: &[V3], c: &[V3]| -> f64 {
        a.iter().zip(c).map(|(x, y)| v3::dot(*x, *y)).sum()
    };
    let mut x = vec![[0.0; 3]; ni];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let tol = 1e-24 * rr.max(1e-30);
    for _ in 0..(20 * ni + 100) {
        if rr <= tol {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..ni {
            x[i] = v3::axpy(x[i], alpha, p[i]);
            r[i] = v3::axpy(r[i], -alpha, ap[i]);
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..ni {
            p[i] = v3::axpy(r[i], beta, p[i]);
        }
        rr = rr_new;
    }
    x
}

/// Quartic radial bump added to the z component of the interior values.
pub fn add_interior_bump(mesh: &DiskMesh, interior: &mut [V3], amplitude: f64, radius: f64) {
    let n = mesh.n_boundary;
    for (k, p) in interior.iter_mut().enumerate() {
        let pos = mesh.vertices[n + k];
        let r = f64::hypot(pos[0], pos[1]) / radius;
        let t = (1.0 - r * r).max(0.0);
        p[2] += amplitude * t * t;
    }
}

/// Canonical start: linear arc phases, discrete-harmonic interior, optional
/// z bump, interior projected into the obstacle.
pub fn initial_state(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    bump_amplitude: f64,
    bump_radius: f64,
) -> Result<SurfaceState, StateError> {
    let phases = canonical_phases(mesh, curve);
    let boundary: Vec<V3> = phases.iter().map(|&p| curve.eval(p)).collect();
    let mut interior = harmonic_interior(mesh, &boundary);
    if bump_amplitude != 0.0 {
        add_interior_bump(mesh, &mut interior, bump_amplitude, bump_radius);
    }
    for p in &mut interior {
        *p = obstacle.project(*p);
    }
    let state = SurfaceState { interior, phases };
    state.validate(mesh, curve, obstacle)?;
    Ok(state)
}
