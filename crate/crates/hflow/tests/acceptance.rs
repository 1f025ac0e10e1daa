//! End-to-end acceptance checks. Each test covers one numbered criterion and
//! prints exactly one verdict line; the heavyweight flow runs are shared
//! through lazily built fixtures.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hflow::curvature::PrescribedCurvature;
use hflow::curve::circle_samples;
use hflow::energy::{
    discrete_mean_curvature, f_gradient, f_value, h_volume, volume_additivity_defect,
};
use hflow::flow::{run_flow, FlowConfig, FlowTrace, InnerConfig};
use hflow::mesh::{build_disk_mesh, DiskMesh};
use hflow::monotone::{project_arc, project_monotone};
use hflow::obstacle::Obstacle;
use hflow::residuals::{standard_field_family, stationarity_residual};
use hflow::state::initial_state;
use hflow::admissibility::check_conditions;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use std::f64::consts::PI;

type V3 = [f64; 3];

fn verdict(n: usize, name: &str, ok: bool, detail: &str) {
    let v = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {n} ({name}): {v}: {detail}");
    assert!(ok, "acceptance {n} ({name}) failed: {detail}");
}

struct Scenario {
    mesh: DiskMesh,
    trace: FlowTrace,
    u: Vec<V3>,
    d0: f64,
    elapsed: Duration,
}

/// The 96x16 mesh conditions the per-step problem at roughly kappa ~ 80, so
/// projected gradient descent wants a few thousand iterations to reach the
/// default gradient tolerance.
fn fine_mesh_inner() -> InnerConfig {
    InnerConfig { max_iters: 4000, ..InnerConfig::default() }
}

fn run_scenario(
    h_field: PrescribedCurvature,
    obstacle: Obstacle,
    bump: f64,
    cfg: FlowConfig,
) -> Scenario {
    let mesh = build_disk_mesh(96, 16).expect("mesh");
    let curve = circle_samples(96);
    let state0 = initial_state(&mesh, &curve, &obstacle, bump, 0.7).expect("start");
    let t0 = Instant::now();
    let (trace, state) =
        run_flow(&mesh, &curve, &obstacle, &h_field, &state0, &cfg, |_, _, _| {})
            .expect("flow");
    let elapsed = t0.elapsed();
    let u = state.realize(&mesh, &curve, &obstacle).expect("realize");
    let d0 = trace.records[0].dirichlet;
    Scenario { mesh, trace, u, d0, elapsed }
}

/// Circle boundary, zero curvature, bumped start: relaxes to the flat disk.
fn scenario_minimal() -> &'static Scenario {
    static S: OnceLock<Scenario> = OnceLock::new();
    S.get_or_init(|| {
        run_scenario(
            PrescribedCurvature::Constant(0.0),
            Obstacle::AllSpace,
            0.5,
            FlowConfig {
                h: 0.05,
                max_steps: 2000,
                inner: fine_mesh_inner(),
                dt_tol: 1e-4,
                hopf_tol: 3.0e-3,
                c: 1.0 / 3.0,
                s: None,
                n_test: 24,
                cadence: 0,
                override_admissibility: false,
            },
        )
    })
}

/// Circle boundary, H = 0.5 inside Ball(0,4), flat start: fills to the
/// spherical cap of radius 2. The boundary-sphere condition fails at this
/// curvature, so the run rides on the override.
fn scenario_cap() -> &'static Scenario {
    static S: OnceLock<Scenario> = OnceLock::new();
    S.get_or_init(|| {
        run_scenario(
            PrescribedCurvature::Constant(0.5),
            Obstacle::Ball { center: [0.0; 3], radius: 4.0 },
            0.0,
            FlowConfig {
                h: 0.05,
                max_steps: 2000,
                inner: fine_mesh_inner(),
                dt_tol: 1e-4,
                hopf_tol: 0.05,
                c: 1.0 / 3.0,
                s: Some(10.0),
                n_test: 24,
                cadence: 0,
                override_admissibility: true,
            },
        )
    })
}

/// Fixed-step checkpoint states of the minimal-surface scenario at T = 1.0
/// for three time steps, plus a converged coarse-step endpoint.
struct Checkpoints {
    mesh: DiskMesh,
    at_t1: [Vec<V3>; 3],
    coarse_endpoint: Vec<V3>,
}

fn checkpoints() -> &'static Checkpoints {
    static S: OnceLock<Checkpoints> = OnceLock::new();
    S.get_or_init(|| {
        let mesh = build_disk_mesh(96, 16).expect("mesh");
        let curve = circle_samples(96);
        let all = Obstacle::AllSpace;
        let h0 = PrescribedCurvature::Constant(0.0);
        let state0 = initial_state(&mesh, &curve, &all, 0.5, 0.7).expect("start");
        let fixed = |h: f64, steps: usize| -> Vec<V3> {
            let cfg = FlowConfig {
                h,
                max_steps: steps,
                inner: fine_mesh_inner(),
                dt_tol: 0.0,
                hopf_tol: 0.0,
                cadence: 0,
                ..FlowConfig::default()
            };
            let (_, state) =
                run_flow(&mesh, &curve, &all, &h0, &state0, &cfg, |_, _, _| {})
                    .expect("flow");
            state.realize(&mesh, &curve, &all).expect("realize")
        };
        let at_t1 = [fixed(0.1, 10), fixed(0.05, 20), fixed(0.025, 40)];
        let cfg = FlowConfig {
            h: 0.1,
            max_steps: 2000,
            inner: fine_mesh_inner(),
            dt_tol: 1e-4,
            hopf_tol: 3.0e-3,
            cadence: 0,
            ..FlowConfig::default()
        };
        let (_, state) =
            run_flow(&mesh, &curve, &all, &h0, &state0, &cfg, |_, _, _| {})
                .expect("flow");
        let coarse_endpoint = state.realize(&mesh, &curve, &all).expect("realize");
        Checkpoints { mesh, at_t1, coarse_endpoint }
    })
}

fn l2_dist(mesh: &DiskMesh, a: &[V3], b: &[V3]) -> f64 {
    let d: Vec<V3> = a
        .iter()
        .zip(b)
        .map(|(x, y)| [x[0] - y[0], x[1] - y[1], x[2] - y[2]])
        .collect();
    mesh.l2_inner(&d, &d).sqrt()
}

fn jittered_disk(mesh: &DiskMesh, rng: &mut ChaCha8Rng, amp: f64) -> Vec<V3> {
    mesh.vertices
        .iter()
        .map(|p| {
            [
                p[0] + amp * (rng.gen::<f64>() - 0.5),
                p[1] + amp * (rng.gen::<f64>() - 0.5),
                amp * (rng.gen::<f64>() - 0.5),
            ]
        })
        .collect()
}

fn share_trace(mesh: &DiskMesh, dst: &mut [V3], src: &[V3]) {
    for &(i, _) in &mesh.boundary_loop {
        dst[i] = src[i];
    }
}

#[test]
fn criterion_1_minimal_surface_endpoint() {
    let s = scenario_minimal();
    let last = s.trace.records.last().unwrap();
    let d = last.dirichlet;
    let steps = last.step;
    let ok = s.trace.converged
        && steps <= 2000
        && (d - PI).abs() <= 0.02 * PI
        && last.hopf_residual <= 1e-3 * d
        && s.elapsed <= Duration::from_secs(300);
    verdict(
        1,
        "minimal surface endpoint",
        ok,
        &format!(
            "converged={} steps={} D={:.6} (pi {:+.3}%), hopf={:.3e} (<= {:.3e}), {:.1?}",
            s.trace.converged,
            steps,
            d,
            100.0 * (d - PI) / PI,
            last.hopf_residual,
            1e-3 * d,
            s.elapsed
        ),
    );
}

#[test]
fn criterion_2_spherical_cap() {
    let s = scenario_cap();
    let want = 2.0 - 3.0f64.sqrt();
    let apex = s.u.iter().map(|p| p[2].abs()).fold(0.0, f64::max);
    let mc = discrete_mean_curvature(&s.mesh, &s.u);
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in s.mesh.n_boundary..s.mesh.vertex_count() {
        let p = s.mesh.vertices[i];
        if p[0].hypot(p[1]) <= 0.5 {
            worst = worst.max((mc[i] - 0.5).abs() / 0.5);
            count += 1;
        }
    }
    let ok = s.trace.converged
        && (apex - want).abs() <= 0.05 * want
        && count > 0
        && worst <= 0.10;
    verdict(
        2,
        "spherical cap",
        ok,
        &format!(
            "converged={} apex={:.5} (target {:.5}, {:+.2}%), worst |H| dev {:.2}% over {} inner vertices",
            s.trace.converged,
            apex,
            want,
            100.0 * (apex - want) / want,
            100.0 * worst,
            count
        ),
    );
}

#[test]
fn criterion_3_dissipation_ledger() {
    let sigma = (1.0 + 1.0 / 3.0) / (1.0 - 1.0 / 3.0);
    let mut detail = String::new();
    let mut ok = true;
    for (name, s) in [("minimal", scenario_minimal()), ("cap", scenario_cap())] {
        let mut worst_diss = f64::NEG_INFINITY;
        let mut worst_d = f64::NEG_INFINITY;
        for r in &s.trace.records {
            worst_diss = worst_diss.max(r.dissipation_total);
            worst_d = worst_d.max(r.dirichlet);
        }
        let here = worst_diss <= 2.0 * s.d0 + 1e-8 && worst_d <= sigma * s.d0 + 1e-8;
        ok &= here;
        detail.push_str(&format!(
            "{name}: max diss {:.4} <= {:.4}, max D {:.4} <= {:.4}; ",
            worst_diss,
            2.0 * s.d0,
            worst_d,
            sigma * s.d0
        ));
    }
    verdict(3, "dissipation ledger", ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_4_gradient_consistency() {
    let mesh = build_disk_mesh(6, 1).unwrap();
    let all = Obstacle::AllSpace;
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let u = jittered_disk(&mesh, &mut r, 0.5);
    let mut u0 = jittered_disk(&mesh, &mut r, 0.5);
    let mut z = jittered_disk(&mesh, &mut r, 0.5);
    share_trace(&mesh, &mut u0, &u);
    share_trace(&mesh, &mut z, &u);
    let h = 0.05;
    let mut detail = String::new();
    let mut ok = true;
    for (label, h_field, tol) in [
        ("constant", PrescribedCurvature::Constant(0.5), 1e-6),
        (
            "radial",
            PrescribedCurvature::radial([4.0, 0.0, 0.0], vec![(2.0, 0.55), (6.0, 0.45)])
                .unwrap(),
            1e-4,
        ),
    ] {
        let g = f_gradient(&mesh, &u, &z, h, &h_field);
        let scale = g
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max);
        let eps = 1e-6;
        let mut max_rel = 0.0f64;
        for i in 0..u.len() {
            for c in 0..3 {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[i][c] += eps;
                dn[i][c] -= eps;
                let fp = f_value(&mesh, &up, &u0, &z, h, &h_field, &all).unwrap();
                let fm = f_value(&mesh, &dn, &u0, &z, h, &h_field, &all).unwrap();
                let fd = (fp - fm) / (2.0 * eps);
                max_rel = max_rel.max((fd - g[i][c]).abs() / scale);
            }
        }
        ok &= max_rel <= tol;
        detail.push_str(&format!("{label}: rel {max_rel:.2e} <= {tol:.0e}; "));
    }
    verdict(4, "gradient consistency", ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_5_volume_identities() {
    let mesh = build_disk_mesh(24, 4).unwrap();
    let ball = Obstacle::Ball { center: [0.0; 3], radius: 2.0 };
    let h = PrescribedCurvature::Constant(0.7);
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let base = jittered_disk(&mesh, &mut r, 0.6);
    let mut ut = jittered_disk(&mesh, &mut r, 0.6);
    let mut u = jittered_disk(&mesh, &mut r, 0.6);
    let mut v = jittered_disk(&mesh, &mut r, 0.6);
    for s in [&mut ut, &mut u, &mut v] {
        share_trace(&mesh, s, &base);
    }
    let self_vol = h_volume(&mesh, &u, &u, &h, &ball, 2, 2).unwrap();
    let anti = (h_volume(&mesh, &u, &v, &h, &ball, 2, 2).unwrap()
        + h_volume(&mesh, &v, &u, &h, &ball, 2, 2).unwrap())
    .abs();
    let addv = volume_additivity_defect(&mesh, &ut, &u, &v, &h, &ball, 2, 2).unwrap();

    let fine = build_disk_mesh(96, 16).unwrap();
    let flat: Vec<V3> = fine.vertices.iter().map(|p| [p[0], p[1], 0.0]).collect();
    let parab: Vec<V3> = fine
        .vertices
        .iter()
        .map(|p| [p[0], p[1], 1.0 - p[0] * p[0] - p[1] * p[1]])
        .collect();
    let one = PrescribedCurvature::Constant(1.0);
    let vol = h_volume(&fine, &parab, &flat, &one, &Obstacle::AllSpace, 2, 2).unwrap();
    let want = PI / 2.0;

    let ok = self_vol == 0.0
        && anti <= 1e-12
        && addv <= 1e-12
        && (vol - want).abs() <= 0.02 * want;
    verdict(
        5,
        "volume identities",
        ok,
        &format!(
            "self={self_vol:.1e} antisym={anti:.2e} additivity={addv:.2e} paraboloid={vol:.5} (pi/2 {:+.2}%)",
            100.0 * (vol - want) / want
        ),
    );
}

#[test]
fn criterion_6_condition_checkers() {
    let mesh = build_disk_mesh(48, 8).unwrap();
    let curve = circle_samples(48);
    let ball = Obstacle::Ball { center: [0.0; 3], radius: 1.0 };
    let u0 = initial_state(&mesh, &curve, &ball, 0.0, 0.7)
        .unwrap()
        .realize(&mesh, &curve, &ball)
        .unwrap();
    let big = check_conditions(
        &mesh,
        &curve,
        &ball,
        &PrescribedCurvature::Constant(1.4),
        &u0,
        1.0 / 3.0,
        None,
    )
    .unwrap();
    let small = check_conditions(
        &mesh,
        &curve,
        &ball,
        &PrescribedCurvature::Constant(0.9),
        &u0,
        1.0 / 3.0,
        None,
    )
    .unwrap();
    let ok = big.h3.pass
        && !big.rand.pass
        && !big.overall
        && small.h3.pass
        && small.rand.pass;
    verdict(
        6,
        "condition checkers",
        ok,
        &format!(
            "H=1.4: h3={} rand={} overall={}; H=0.9: h3={} rand={}",
            big.h3.pass, big.rand.pass, big.overall, small.h3.pass, small.rand.pass
        ),
    );
}

/// Weighted squared distance with unit weights.
fn obj(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Visit every length-`l` vector over `vals`.
fn each_vector(vals: &[f64], l: usize, f: &mut impl FnMut(&[f64])) {
    let mut idx = vec![0usize; l];
    let mut buf = vec![vals[0]; l];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = vals[i];
        }
        f(&buf);
        let mut k = l;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < vals.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Visit every nondecreasing length-`l` vector over the sorted `vals`.
fn each_monotone(vals: &[f64], l: usize, f: &mut impl FnMut(&[f64])) {
    fn rec(
        vals: &[f64],
        buf: &mut Vec<f64>,
        start: usize,
        left: usize,
        f: &mut impl FnMut(&[f64]),
    ) {
        if left == 0 {
            f(buf);
            return;
        }
        for i in start..vals.len() {
            buf.push(vals[i]);
            rec(vals, buf, i, left - 1, f);
            buf.pop();
        }
    }
    rec(vals, &mut Vec::with_capacity(l), 0, l, f);
}

#[test]
fn criterion_7_isotonic_projection_oracle() {
    let grid: Vec<f64> = (0..6).map(|k| 0.25 * k as f64).collect();
    let mut checked = 0usize;
    let mut ok = true;
    let mut first_bad = String::new();

    // bounded isotonic engine, full range and a clamping window
    for (lo, hi) in [(0.0, 1.25), (0.25, 1.0)] {
        let feas: Vec<f64> =
            grid.iter().copied().filter(|v| *v >= lo && *v <= hi).collect();
        for l in 1..=6 {
            let mut candidates: Vec<Vec<f64>> = Vec::new();
            each_monotone(&feas, l, &mut |g| candidates.push(g.to_vec()));
            each_vector(&grid, l, &mut |v| {
                let w = vec![1.0; l];
                let p = project_arc(v, &w, lo, hi);
                let mut good = p.windows(2).all(|s| s[0] <= s[1] + 1e-12)
                    && p.iter().all(|x| *x >= lo - 1e-12 && *x <= hi + 1e-12);
                let po = obj(&p, v);
                let best = candidates
                    .iter()
                    .map(|g| obj(g, v))
                    .fold(f64::INFINITY, f64::min);
                good &= po <= best + 1e-12;
                let feasible_input = v.windows(2).all(|s| s[0] <= s[1])
                    && v.iter().all(|x| *x >= lo && *x <= hi);
                if feasible_input {
                    good &= p == v;
                }
                if !good && ok {
                    ok = false;
                    first_bad = format!(
                        "arc lo={lo} hi={hi} v={v:?} p={p:?} obj={po:.6} best_grid={best:.6}"
                    );
                }
                checked += 1;
            });
        }
    }

    // cyclic wrapper with locked anchors: chained wrap arc and split arcs
    let tau = std::f64::consts::TAU;
    let mut anchor_sets: Vec<[f64; 3]> = Vec::new();
    each_monotone(&grid, 3, &mut |a| anchor_sets.push([a[0], a[1], a[2]]));
    for layout in [[0usize, 1, 2], [0, 2, 4]] {
        for &[a0, a1, a2] in &anchor_sets {
            let anchors = [(layout[0], a0), (layout[1], a1), (layout[2], a2)];
            let free: Vec<usize> =
                (0..6).filter(|j| !layout.contains(j)).collect();
            // feasible grid completions, free slots bounded by their arc
            let bound_of = |j: usize| -> (f64, f64) {
                if layout == [0, 1, 2] {
                    (a2, tau + a0)
                } else {
                    match j {
                        1 => (a0, a1),
                        3 => (a1, a2),
                        _ => (a2, tau + a0),
                    }
                }
            };
            let mut candidates: Vec<Vec<f64>> = Vec::new();
            if layout == [0, 1, 2] {
                let feas: Vec<f64> =
                    grid.iter().copied().filter(|v| *v >= a2).collect();
                each_monotone(&feas, 3, &mut |g| candidates.push(g.to_vec()));
            } else {
                let per: Vec<Vec<f64>> = free
                    .iter()
                    .map(|&j| {
                        let (lo, hi) = bound_of(j);
                        grid.iter().copied().filter(|v| *v >= lo && *v <= hi).collect()
                    })
                    .collect();
                for &x in &per[0] {
                    for &y in &per[1] {
                        for &z in &per[2] {
                            candidates.push(vec![x, y, z]);
                        }
                    }
                }
            }
            each_vector(&grid, 3, &mut |vfree| {
                let mut phases = [0.0; 6];
                phases[layout[0]] = a0;
                phases[layout[1]] = a1;
                phases[layout[2]] = a2;
                for (&j, &x) in free.iter().zip(vfree) {
                    phases[j] = x;
                }
                let w = vec![1.0; 6];
                let p = project_monotone(&phases, &w, &anchors).unwrap();
                let mut good = (p[layout[0]] - a0).abs() == 0.0
                    && (p[layout[1]] - a1).abs() == 0.0
                    && (p[layout[2]] - a2).abs() == 0.0;
                for (&j, _) in free.iter().zip(vfree) {
                    let (lo, hi) = bound_of(j);
                    good &= p[j] >= lo - 1e-12 && p[j] <= hi + 1e-12;
                }
                let pfree: Vec<f64> = free.iter().map(|&j| p[j]).collect();
                if layout == [0, 1, 2] {
                    good &= pfree.windows(2).all(|s| s[0] <= s[1] + 1e-12);
                }
                let po = obj(&pfree, vfree);
                let best = candidates
                    .iter()
                    .map(|g| obj(g, vfree))
                    .fold(f64::INFINITY, f64::min);
                good &= po <= best + 1e-12;
                if !good && ok {
                    ok = false;
                    first_bad = format!(
                        "cyclic layout={layout:?} anchors=({a0},{a1},{a2}) v={vfree:?} p={pfree:?} obj={po:.6} best_grid={best:.6}"
                    );
                }
                checked += 1;
            });
        }
    }

    verdict(
        7,
        "isotonic projection oracle",
        ok,
        &if ok {
            format!("{checked} exhaustive instances dominated every feasible grid vector")
        } else {
            first_bad
        },
    );
}

#[test]
fn criterion_8_stationarity_residual() {
    let s1 = scenario_minimal();
    let s2 = scenario_cap();
    let r1 = s1.trace.records.last().unwrap().stationarity_residual;
    let r2 = s2.trace.records.last().unwrap().stationarity_residual;

    let mesh = build_disk_mesh(48, 8).unwrap();
    let witness: Vec<V3> =
        mesh.vertices.iter().map(|p| [2.0 * p[0], p[1], 0.0]).collect();
    let zero = vec![[0.0; 3]; mesh.vertex_count()];
    let family = standard_field_family(&mesh);
    let rw = stationarity_residual(&mesh, &witness, &zero, &family);

    let ok = r1 <= 1e-3 && r2 <= 1e-3 && rw >= 0.1;
    verdict(
        8,
        "stationarity residual",
        ok,
        &format!("minimal={r1:.2e} cap={r2:.2e} (<= 1e-3); witness={rw:.3} (>= 0.1)"),
    );
}

#[test]
fn criterion_9_time_step_consistency() {
    let c = checkpoints();
    let d_ref = l2_dist(&c.mesh, &c.at_t1[0], &c.at_t1[1]);
    let d_new = l2_dist(&c.mesh, &c.at_t1[1], &c.at_t1[2]);
    let ratio = d_new / d_ref;

    let s1 = scenario_minimal();
    let drift = l2_dist(&c.mesh, &c.coarse_endpoint, &s1.u);

    let ok = ratio <= 0.7 && drift <= 1e-4;
    verdict(
        9,
        "time-step consistency",
        ok,
        &format!(
            "checkpoint T=1: d(h=.1,.05)={d_ref:.3e} d(h=.05,.025)={d_new:.3e} ratio={ratio:.3} (<= 0.7); converged endpoint drift {drift:.2e} (<= 1e-4)"
        ),
    );
}
