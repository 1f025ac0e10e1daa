//! Time discretization of the curvature flow: each step minimizes the step
//! functional (Dirichlet energy plus twice the prescribed-volume term plus a
//! proximal penalty) over the constrained surface class, by projected
//! gradient descent with Armijo backtracking. The driver keeps a
//! dissipation ledger and per-step optimality residuals and declares
//! convergence when both the discrete time derivative and the conformality
//! defect are small.

use crate::admissibility::{check_conditions, energy_cap, Cap, ConditionReport};
use crate::curvature::PrescribedCurvature;
use crate::curve::JordanCurve;
use crate::energy::{
    default_orders, dirichlet, f_gradient_with_rate, h_volume, hopf_residual,
};
use crate::mesh::DiskMesh;
use crate::monotone::project_monotone;
use crate::obstacle::Obstacle;
use crate::residuals::{neumann_residual, standard_field_family, stationarity_residual};
use crate::state::{anchor_locks, boundary_weights, SurfaceState};
use crate::v3::{self, V3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("initial data fails the admissibility conditions (run `check` for the report)")]
    NotAdmissible(Box<ConditionReport>),
    #[error(transparent)]
    BadIsoperimetric(#[from] crate::admissibility::AdmissibilityError),
    #[error(transparent)]
    State(#[from] crate::state::StateError),
    #[error(transparent)]
    Energy(#[from] crate::energy::EnergyError),
}

/// Inner (per time step) solver knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    pub max_iters: usize,
    /// Stop when the unit-step projected move is at most this in L2.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub step_shrink: f64,
    pub init_step: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            max_iters: 500,
            grad_tol: 1e-6,
            armijo_c: 1e-4,
            step_shrink: 0.5,
            init_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Time step of the minimizing-movements scheme.
    pub h: f64,
    pub max_steps: usize,
    pub inner: InnerConfig,
    /// Convergence threshold on the per-step time derivative in L2.
    pub dt_tol: f64,
    /// Convergence threshold on the conformality defect.
    pub hopf_tol: f64,
    /// Isoperimetric constant in (0,1).
    pub c: f64,
    /// Isoperimetric scale; None means infinity (no energy cap).
    pub s: Option<f64>,
    /// Boundary probe count for the weak Neumann residual.
    pub n_test: usize,
    /// Emit a frame every this many steps (0 disables interior frames).
    pub cadence: usize,
    /// Run the flow even when the admissibility report rejects the data.
    pub override_admissibility: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            h: 0.05,
            max_steps: 2000,
            inner: InnerConfig::default(),
            dt_tol: 1e-4,
            hopf_tol: 0.05,
            c: 1.0 / 3.0,
            s: None,
            n_test: 24,
            cadence: 10,
            override_admissibility: false,
        }
    }
}

fn validate_config(cfg: &FlowConfig) {
    assert!(cfg.h > 0.0, "time step must be positive");
    assert!(cfg.dt_tol >= 0.0 && cfg.hopf_tol >= 0.0);
    assert!(cfg.inner.grad_tol > 0.0 && cfg.inner.init_step > 0.0);
    assert!(
        cfg.inner.armijo_c > 0.0 && cfg.inner.armijo_c < 1.0,
        "armijo_c must lie in (0,1)"
    );
    assert!(
        cfg.inner.step_shrink > 0.0 && cfg.inner.step_shrink < 1.0,
        "step_shrink must lie in (0,1)"
    );
}

/// One row of the ledger. `step` 0 describes the initial surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub dirichlet: f64,
    pub h_volume: f64,
    pub f_value: f64,
    pub dissipation_increment: f64,
    pub dissipation_total: f64,
    /// ||u_j - u_{j-1}||_{L2} / h.
    pub dt_norm: f64,
    pub hopf_residual: f64,
    pub neumann_residual: f64,
    pub stationarity_residual: f64,
    pub inner_iters: usize,
    /// The line search could not decrease F; the state is the previous one.
    pub stalled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrace {
    pub records: Vec<StepRecord>,
    /// Invariant breaches (ledger or energy cap), newest last.
    pub warnings: Vec<String>,
    /// Both stopping thresholds were met before max_steps.
    pub converged: bool,
    pub stalled: bool,
}

impl FlowTrace {
    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("trace always holds the initial record")
    }
}

/// The step functional and its constraint geometry. `inv_h = 0` drops the
/// proximal term (direct stationary minimization).
struct Problem<'a> {
    mesh: &'a DiskMesh,
    curve: &'a JordanCurve,
    obstacle: &'a Obstacle,
    h_field: &'a PrescribedCurvature,
    u0: &'a [V3],
    z: Vec<V3>,
    inv_h: f64,
    locks: [(usize, f64); 3],
    weights: Vec<f64>,
    q_s: usize,
    q_x: usize,
}

impl Problem<'_> {
    fn objective(&self, u: &[V3]) -> f64 {
        let vol = match h_volume(
            self.mesh, u, self.u0, self.h_field, self.obstacle, self.q_s, self.q_x,
        ) {
            Ok(v) => v,
            // infeasible homotopy: reject the candidate
            Err(_) => return f64::INFINITY,
        };
        let mut val = dirichlet(self.mesh, u) + 2.0 * vol;
        if self.inv_h > 0.0 {
            let diff: Vec<V3> =
                u.iter().zip(&self.z).map(|(a, b)| v3::sub(*a, *b)).collect();
            val += 0.5 * self.inv_h * self.mesh.l2_inner(&diff, &diff);
        }
        val
    }

    fn gradient(&self, u: &[V3]) -> Vec<V3> {
        let rate: Vec<V3> = if self.inv_h > 0.0 {
            u.iter()
                .zip(&self.z)
                .map(|(a, b)| v3::scale(v3::sub(*a, *b), self.inv_h))
                .collect()
        } else {
            vec![[0.0; 3]; u.len()]
        };
        f_gradient_with_rate(self.mesh, u, &rate, self.h_field)
    }

    /// Mass-scaled descent velocity: interior block in position space,
    /// boundary block in phase space through the chain rule.
    fn velocity(&self, state: &SurfaceState, g: &[V3]) -> (Vec<V3>, Vec<f64>) {
        let n = self.mesh.n_boundary;
        let v_phase: Vec<f64> = (0..n)
            .map(|j| {
                let t = self.curve.eval_d1(state.phases[j]);
                let m = self.mesh.lumped_mass[j] * v3::dot(t, t);
                v3::dot(g[j], t) / m.max(1e-300)
            })
            .collect();
        let v_int: Vec<V3> = (n..g.len())
            .map(|i| v3::scale(g[i], 1.0 / self.mesh.lumped_mass[i]))
            .collect();
        (v_int, v_phase)
    }

    fn advance(
        &self,
        state: &SurfaceState,
        vel: &(Vec<V3>, Vec<f64>),
        alpha: f64,
    ) -> SurfaceState {
        let moved: Vec<f64> = state
            .phases
            .iter()
            .zip(&vel.1)
            .map(|(p, v)| p - alpha * v)
            .collect();
        let phases = project_monotone(&moved, &self.weights, &self.locks)
            .expect("anchor locks were validated at flow start");
        let interior: Vec<V3> = state
            .interior
            .iter()
            .zip(&vel.0)
            .map(|(x, v)| self.obstacle.project(v3::axpy(*x, -alpha, *v)))
            .collect();
        SurfaceState { interior, phases }
    }
}

struct MinimizeOutcome {
    state: SurfaceState,
    u: Vec<V3>,
    f_value: f64,
    iters: usize,
    stalled: bool,
}

fn minimize(problem: &Problem, start: SurfaceState, inner: &InnerConfig) -> MinimizeOutcome {
    let mut state = start;
    let mut u = state.realize_unchecked(problem.mesh, problem.curve);
    let mut f = problem.objective(&u);
    let mut alpha = inner.init_step;
    for it in 0..inner.max_iters {
        let g = problem.gradient(&u);
        let vel = problem.velocity(&state, &g);

        let cand_unit = problem.advance(&state, &vel, 1.0);
        let u_unit = cand_unit.realize_unchecked(problem.mesh, problem.curve);
        let pg = problem.mesh.l2_dist(&u_unit, &u);
        if pg <= inner.grad_tol {
            return MinimizeOutcome { state, u, f_value: f, iters: it, stalled: false };
        }

        // warm restart: try one size up from the last accepted step
        alpha = (alpha / inner.step_shrink).min(inner.init_step);
        loop {
            let (cand, u_cand) = if alpha == 1.0 {
                (cand_unit.clone(), u_unit.clone())
            } else {
                let c = problem.advance(&state, &vel, alpha);
                let uc = c.realize_unchecked(problem.mesh, problem.curve);
                (c, uc)
            };
            let f_cand = problem.objective(&u_cand);
            let diff: Vec<V3> =
                u_cand.iter().zip(&u).map(|(a, b)| v3::sub(*a, *b)).collect();
            let move2 = problem.mesh.l2_inner(&diff, &diff);
            if move2 > 0.0 && f_cand <= f - (inner.armijo_c / alpha) * move2 {
                state = cand;
                u = u_cand;
                f = f_cand;
                break;
            }
            alpha *= inner.step_shrink;
            if alpha < 1e-14 * inner.init_step {
                return MinimizeOutcome { state, u, f_value: f, iters: it, stalled: true };
            }
        }
    }
    MinimizeOutcome { state, u, f_value: f, iters: inner.max_iters, stalled: false }
}

fn diagnostics(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    state: &SurfaceState,
    u: &[V3],
    rate: &[V3],
    n_test: usize,
) -> (f64, f64, f64) {
    let family = standard_field_family(mesh);
    let hopf = hopf_residual(mesh, u);
    let neumann = neumann_residual(mesh, curve, obstacle, h_field, state, u, rate, n_test);
    let stat = stationarity_residual(mesh, u, rate, &family);
    (hopf, neumann, stat)
}

fn problem<'a>(
    mesh: &'a DiskMesh,
    curve: &'a JordanCurve,
    obstacle: &'a Obstacle,
    h_field: &'a PrescribedCurvature,
    u0: &'a [V3],
    z: Vec<V3>,
    inv_h: f64,
) -> Problem<'a> {
    let (q_s, q_x) = default_orders(h_field);
    Problem {
        mesh,
        curve,
        obstacle,
        h_field,
        u0,
        z,
        inv_h,
        locks: anchor_locks(mesh, curve),
        weights: boundary_weights(mesh),
        q_s,
        q_x,
    }
}

/// One minimizing-movements step from `prev`. The returned record carries the
/// step's energies and residuals; `step`, `time` and `dissipation_total` are
/// filled in by the driver.
pub fn rothe_step(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    u0: &[V3],
    prev: &SurfaceState,
    cfg: &FlowConfig,
) -> Result<(SurfaceState, StepRecord), FlowError> {
    validate_config(cfg);
    let z = prev.realize(mesh, curve, obstacle)?;
    let prob = problem(mesh, curve, obstacle, h_field, u0, z, 1.0 / cfg.h);
    let out = minimize(&prob, prev.clone(), &cfg.inner);

    let diff: Vec<V3> =
        out.u.iter().zip(&prob.z).map(|(a, b)| v3::sub(*a, *b)).collect();
    let move2 = mesh.l2_inner(&diff, &diff);
    let rate: Vec<V3> = diff.iter().map(|d| v3::scale(*d, 1.0 / cfg.h)).collect();
    let (hopf, neumann, stat) = diagnostics(
        mesh, curve, obstacle, h_field, &out.state, &out.u, &rate, cfg.n_test,
    );
    let d = dirichlet(mesh, &out.u);
    let vol = h_volume(mesh, &out.u, u0, h_field, obstacle, prob.q_s, prob.q_x)?;
    let record = StepRecord {
        step: 0,
        time: 0.0,
        dirichlet: d,
        h_volume: vol,
        f_value: out.f_value,
        dissipation_increment: move2 / (2.0 * cfg.h),
        dissipation_total: move2 / (2.0 * cfg.h),
        dt_norm: move2.sqrt() / cfg.h,
        hopf_residual: hopf,
        neumann_residual: neumann,
        stationarity_residual: stat,
        inner_iters: out.iters,
        stalled: out.stalled,
    };
    Ok((out.state, record))
}

fn initial_record(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    state: &SurfaceState,
    u: &[V3],
    cfg: &FlowConfig,
) -> Result<StepRecord, FlowError> {
    let zero = vec![[0.0; 3]; u.len()];
    let (hopf, neumann, stat) =
        diagnostics(mesh, curve, obstacle, h_field, state, u, &zero, cfg.n_test);
    let d = dirichlet(mesh, u);
    Ok(StepRecord {
        step: 0,
        time: 0.0,
        dirichlet: d,
        h_volume: 0.0,
        f_value: d,
        dissipation_increment: 0.0,
        dissipation_total: 0.0,
        dt_norm: 0.0,
        hopf_residual: hopf,
        neumann_residual: neumann,
        stationarity_residual: stat,
        inner_iters: 0,
        stalled: false,
    })
}

/// Drive the scheme from `u0_state` until both stopping thresholds are met,
/// a step stalls, or `max_steps` runs out. `on_frame` receives the initial
/// surface, every `cadence`-th accepted step, and the final one.
pub fn run_flow(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    u0_state: &SurfaceState,
    cfg: &FlowConfig,
    mut on_frame: impl FnMut(usize, &SurfaceState, &[V3]),
) -> Result<(FlowTrace, SurfaceState), FlowError> {
    validate_config(cfg);
    let u0 = u0_state.realize(mesh, curve, obstacle)?;
    let mut warnings = Vec::new();

    let report = check_conditions(mesh, curve, obstacle, h_field, &u0, cfg.c, cfg.s)?;
    if !report.overall {
        if cfg.override_admissibility {
            warnings.push(
                "admissibility report rejected the data; running on override".to_string(),
            );
        } else {
            return Err(FlowError::NotAdmissible(Box::new(report)));
        }
    }
    let d0 = report.dirichlet_u0;
    let cap = energy_cap(cfg.c, cfg.s, d0)?;

    let mut trace = FlowTrace {
        records: vec![initial_record(mesh, curve, obstacle, h_field, u0_state, &u0, cfg)?],
        warnings,
        converged: false,
        stalled: false,
    };
    on_frame(0, u0_state, &u0);

    let mut state = u0_state.clone();
    for j in 1..=cfg.max_steps {
        let (next, mut rec) = rothe_step(mesh, curve, obstacle, h_field, &u0, &state, cfg)?;
        rec.step = j;
        rec.time = j as f64 * cfg.h;
        rec.dissipation_total =
            trace.records.last().unwrap().dissipation_total + rec.dissipation_increment;

        if rec.dissipation_total > 2.0 * d0 + 1e-8 {
            trace.warnings.push(format!(
                "step {j}: cumulative dissipation {:.6e} exceeds twice the initial energy {:.6e}",
                rec.dissipation_total,
                2.0 * d0
            ));
        }
        if let Cap::Finite(bound) = cap {
            if rec.dirichlet > bound + 1e-8 {
                trace.warnings.push(format!(
                    "step {j}: Dirichlet energy {:.6e} exceeds the cap {:.6e}",
                    rec.dirichlet, bound
                ));
            }
        }

        let stalled = rec.stalled;
        let done = rec.dt_norm <= cfg.dt_tol && rec.hopf_residual <= cfg.hopf_tol;
        trace.records.push(rec);
        state = next;

        let at_cadence = cfg.cadence > 0 && j % cfg.cadence == 0;
        if at_cadence || done || stalled || j == cfg.max_steps {
            let u = state.realize_unchecked(mesh, curve);
            on_frame(j, &state, &u);
        }
        if stalled {
            trace.stalled = true;
            break;
        }
        if done {
            trace.converged = true;
            break;
        }
    }
    Ok((trace, state))
}

/// Direct constrained minimization of the stationary functional (no proximal
/// term): the same projected-gradient machinery with the time step removed.
pub fn solve_stationary(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    u0_state: &SurfaceState,
    cfg: &FlowConfig,
) -> Result<(SurfaceState, StepRecord), FlowError> {
    validate_config(cfg);
    let u0 = u0_state.realize(mesh, curve, obstacle)?;
    if !cfg.override_admissibility {
        let report = check_conditions(mesh, curve, obstacle, h_field, &u0, cfg.c, cfg.s)?;
        if !report.overall {
            return Err(FlowError::NotAdmissible(Box::new(report)));
        }
    }
    let prob = problem(mesh, curve, obstacle, h_field, &u0, u0.clone(), 0.0);
    let out = minimize(&prob, u0_state.clone(), &cfg.inner);

    let zero = vec![[0.0; 3]; out.u.len()];
    let (hopf, neumann, stat) = diagnostics(
        mesh, curve, obstacle, h_field, &out.state, &out.u, &zero, cfg.n_test,
    );
    let d = dirichlet(mesh, &out.u);
    let vol = h_volume(mesh, &out.u, &u0, h_field, obstacle, prob.q_s, prob.q_x)?;
    let record = StepRecord {
        step: 0,
        time: 0.0,
        dirichlet: d,
        h_volume: vol,
        f_value: out.f_value,
        dissipation_increment: 0.0,
        dissipation_total: 0.0,
        dt_norm: 0.0,
        hopf_residual: hopf,
        neumann_residual: neumann,
        stationarity_residual: stat,
        inner_iters: out.iters,
        stalled: out.stalled,
    };
    Ok((out.state, record))
}
