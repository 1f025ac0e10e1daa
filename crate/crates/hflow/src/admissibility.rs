//! The sufficient admissibility conditions on (H, A, u0): four alternative
//! curvature-size conditions, the boundary curvature comparison, the initial
//! energy bound, and the energy cap derived from the isoperimetric pair.

use crate::curvature::{profile_eval, PrescribedCurvature};
use crate::curve::JordanCurve;
use crate::energy::dirichlet;
use crate::mesh::DiskMesh;
use crate::obstacle::Obstacle;
use crate::v3::{self, V3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AdmissibilityError {
    #[error("isoperimetric constant c = {0} must lie in (0,1)")]
    IsoperimetricConstant(f64),
    #[error("isoperimetric scale s = {0} must be positive")]
    IsoperimetricScale(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl ConditionVerdict {
    fn compare(value: f64, threshold: f64, strict: bool) -> Self {
        ConditionVerdict {
            pass: if strict { value < threshold } else { value <= threshold },
            value: Some(value),
            threshold: Some(threshold),
            note: None,
        }
    }

    fn pass_note(note: &str) -> Self {
        ConditionVerdict { pass: true, value: None, threshold: None, note: Some(note.into()) }
    }

    fn unsupported(note: &str) -> Self {
        ConditionVerdict { pass: false, value: None, threshold: None, note: Some(note.into()) }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Per-condition verdicts plus the echoed inputs. Overall admissibility is
/// (h1 or h2 or h3 or h4) and rand and assum_uo, with the curve required to
/// stay inside the obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub h1: ConditionVerdict,
    pub h2: ConditionVerdict,
    pub h3: ConditionVerdict,
    pub h4: ConditionVerdict,
    pub rand: ConditionVerdict,
    pub assum_uo: ConditionVerdict,
    pub c: f64,
    /// None encodes s = infinity.
    pub s: Option<f64>,
    /// (1+c)/(1-c) when s is finite, None for the infinite cap.
    pub sigma: Option<f64>,
    pub h_sup_bound: f64,
    pub dirichlet_u0: f64,
    pub curve_in_obstacle: bool,
    pub overall: bool,
}

/// The Dirichlet cap sigma * D(u0) of the constrained class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cap {
    Finite(f64),
    Infinite,
}

impl Cap {
    pub fn allows(&self, d: f64, slack: f64) -> bool {
        match self {
            Cap::Finite(cap) => d <= cap + slack,
            Cap::Infinite => true,
        }
    }
}

pub fn sigma_factor(c: f64, s: Option<f64>) -> Result<Option<f64>, AdmissibilityError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(AdmissibilityError::IsoperimetricConstant(c));
    }
    match s {
        None => Ok(None),
        Some(sv) if sv > 0.0 => Ok(Some((1.0 + c) / (1.0 - c))),
        Some(sv) => Err(AdmissibilityError::IsoperimetricScale(sv)),
    }
}

pub fn energy_cap(c: f64, s: Option<f64>, u0_energy: f64) -> Result<Cap, AdmissibilityError> {
    Ok(match sigma_factor(c, s)? {
        Some(sigma) => Cap::Finite(sigma * u0_energy),
        None => Cap::Infinite,
    })
}

/// Area of the sphere of radius `r` around a point at distance `d` from the
/// ball center that lies inside the ball of radius `rad`. `rad` may be
/// infinite (no constraint).
fn shell_area_inside(r: f64, d: f64, rad: f64) -> f64 {
    let full = 4.0 * PI * r * r;
    if rad.is_infinite() {
        return full;
    }
    if d <= 1e-15 {
        return if r <= rad { full } else { 0.0 };
    }
    if r <= 1e-300 {
        return if d <= rad { full } else { 0.0 };
    }
    let cos_star = (d * d + r * r - rad * rad) / (2.0 * d * r);
    if cos_star <= -1.0 {
        full
    } else if cos_star >= 1.0 {
        0.0
    } else {
        2.0 * PI * r * r * (1.0 - cos_star)
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_half: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = 2 * n_half;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Radial layer-cake evaluator for a piecewise-linear |H| profile around a
/// center at distance `d` from the obstacle-ball center (`rad` possibly
/// infinite). Its pieces are intervals where |H| is linear and the shell
/// area is smooth.
struct RadialIntegrator {
    d: f64,
    rad: f64,
    /// (a, b, |H|(a), |H|(b)) per piece.
    pieces: Vec<(f64, f64, f64, f64)>,
}

impl RadialIntegrator {
    fn new(table: &[(f64, f64)], d: f64, rad: f64) -> Self {
        let r_last = table.last().unwrap().0;
        let (lo, hi) = if rad.is_infinite() {
            // meaningful only when the profile tail vanishes: large-|H|
            // level sets are then contained in r <= r_last
            (0.0, r_last.max(1e-12))
        } else {
            ((d - rad).max(0.0), d + rad)
        };
        let mut brk = vec![lo, hi];
        if rad.is_finite() {
            brk.push((rad - d).abs());
        }
        for &(r, _) in table {
            brk.push(r);
        }
        // zero crossings of the linear segments make |H| kink
        for w in table.windows(2) {
            let (r0, h0) = w[0];
            let (r1, h1) = w[1];
            if (h0 > 0.0) != (h1 > 0.0) && h0 != h1 {
                brk.push(r0 + (0.0 - h0) * (r1 - r0) / (h1 - h0));
            }
        }
        brk.retain(|r| r.is_finite() && *r >= lo - 1e-15 && *r <= hi + 1e-15);
        brk.sort_by(|a, b| a.partial_cmp(b).unwrap());
        brk.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let mut pieces = Vec::new();
        for w in brk.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a > 1e-14 {
                pieces.push((a, b, profile_eval(table, a).abs(), profile_eval(table, b).abs()));
            }
        }
        RadialIntegrator { d, rad, pieces }
    }

    /// Sub-pieces of one piece where |H| >= tau.
    fn clip(a: f64, b: f64, ha: f64, hb: f64, tau: f64) -> Option<(f64, f64)> {
        if ha >= tau && hb >= tau {
            Some((a, b))
        } else if ha < tau && hb < tau {
            None
        } else {
            let x = a + (tau - ha) * (b - a) / (hb - ha);
            if ha >= tau {
                Some((a, x))
            } else {
                Some((x, b))
            }
        }
    }

    /// Lebesgue measure of { x in A : |H(x)| >= tau }, tau > 0.
    fn measure_above(&self, tau: f64) -> f64 {
        let mut acc = 0.0;
        for &(a, b, ha, hb) in &self.pieces {
            if let Some((x, y)) = Self::clip(a, b, ha, hb, tau) {
                acc += simpson(|r| shell_area_inside(r, self.d, self.rad), x, y, 48);
            }
        }
        acc
    }

    /// Integral of |H|^3 over { x in A : |H(x)| >= tau }.
    fn cube_integral_above(&self, tau: f64) -> f64 {
        let mut acc = 0.0;
        for &(a, b, ha, hb) in &self.pieces {
            if let Some((x, y)) = Self::clip(a, b, ha, hb, tau) {
                let table_vals = (ha, hb, a, b);
                acc += simpson(
                    |r| {
                        let (ha, hb, a, b) = table_vals;
                        let h = if b > a { ha + (hb - ha) * (r - a) / (b - a) } else { ha };
                        h * h * h * shell_area_inside(r, self.d, self.rad)
                    },
                    x,
                    y,
                    48,
                );
            }
        }
        acc
    }

    /// Worst tau of measure(tau) * tau^3, scanned over the profile levels.
    fn level_bound(&self) -> f64 {
        let mut levels: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|&(_, _, ha, hb)| [ha, hb])
            .filter(|h| *h > 0.0)
            .collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        if levels.is_empty() {
            return 0.0;
        }
        let mut taus: Vec<f64> = Vec::new();
        let lowest = levels[0] * 1e-3;
        taus.push(lowest);
        for k in 0..levels.len() {
            let lo = if k == 0 { lowest } else { levels[k - 1] };
            let hi = levels[k];
            for j in 1..=16 {
                taus.push(lo * (hi / lo).powf(j as f64 / 16.0));
            }
            // approach plateau drops from below
            taus.push(hi * (1.0 - 1e-9));
            taus.push(hi);
        }
        taus.into_iter()
            .filter(|t| *t > 0.0)
            .map(|t| self.measure_above(t) * t * t * t)
            .fold(0.0, f64::max)
    }
}

fn ball_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r * r * r
}

/// Deterministic quasi-uniform sphere sample for callback boundary sweeps.
fn fibonacci_sphere(center: V3, radius: f64, n: usize) -> Vec<V3> {
    let golden = PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            v3::axpy(center, radius, [r * th.cos(), r * th.sin(), z])
        })
        .collect()
}

const UNSUPPORTED_CALLBACK: &str =
    "unsupported combination: no finite certificate for a callback curvature field";
const UNSUPPORTED_UNBOUNDED: &str =
    "unsupported combination: the unconstrained obstacle is unbounded";
const ZERO_NOTE: &str = "zero curvature field";

fn check_h1(sup: f64, d0: f64) -> ConditionVerdict {
    let threshold = if d0 > 0.0 { (2.0 * PI / (3.0 * d0)).sqrt() } else { f64::INFINITY };
    ConditionVerdict::compare(sup, threshold, false)
}

fn check_h2(h_field: &PrescribedCurvature, obstacle: &Obstacle, sup: f64) -> ConditionVerdict {
    let threshold = 4.5 * PI;
    match obstacle {
        Obstacle::AllSpace => ConditionVerdict::unsupported(UNSUPPORTED_UNBOUNDED),
        Obstacle::Ball { center, radius } => {
            let tau0 = 1.5 / radius;
            match h_field {
                PrescribedCurvature::Constant(_) => {
                    let value = if sup >= tau0 { sup.powi(3) * ball_volume(*radius) } else { 0.0 };
                    ConditionVerdict::compare(value, threshold, true)
                }
                PrescribedCurvature::Radial { center: hc, table } => {
                    let d = v3::dist(*center, *hc);
                    let integ = RadialIntegrator::new(table, d, *radius);
                    ConditionVerdict::compare(integ.cube_integral_above(tau0), threshold, true)
                }
                PrescribedCurvature::Callback { .. } => {
                    ConditionVerdict::unsupported(UNSUPPORTED_CALLBACK)
                }
            }
        }
    }
}

fn check_h3(obstacle: &Obstacle, sup: f64) -> ConditionVerdict {
    match obstacle {
        Obstacle::AllSpace => {
            ConditionVerdict::unsupported(UNSUPPORTED_UNBOUNDED)
        }
        Obstacle::Ball { radius, .. } => {
            let threshold = 1.5 * (4.0 * PI / (3.0 * ball_volume(*radius))).cbrt();
            ConditionVerdict::compare(sup, threshold, true)
        }
    }
}

fn check_h4(
    h_field: &PrescribedCurvature,
    obstacle: &Obstacle,
    sup: f64,
    c: f64,
) -> ConditionVerdict {
    let scale = 4.0 * PI / 3.0;
    match (obstacle, h_field) {
        (Obstacle::Ball { radius, .. }, PrescribedCurvature::Constant(_)) => {
            ConditionVerdict::compare(ball_volume(*radius) * sup.powi(3), c * scale, false)
        }
        (Obstacle::Ball { center, radius }, PrescribedCurvature::Radial { center: hc, table }) => {
            let d = v3::dist(*center, *hc);
            let integ = RadialIntegrator::new(table, d, *radius);
            ConditionVerdict::compare(integ.level_bound(), c * scale, false)
        }
        (Obstacle::AllSpace, PrescribedCurvature::Radial { table, .. })
            if table.last().unwrap().1 == 0.0 =>
        {
            let integ = RadialIntegrator::new(table, 0.0, f64::INFINITY);
            ConditionVerdict::compare(integ.level_bound(), c * scale, false)
                .with_note("profile tail vanishes, level sets are bounded")
        }
        (Obstacle::AllSpace, _) => ConditionVerdict::unsupported(UNSUPPORTED_UNBOUNDED),
        (_, PrescribedCurvature::Callback { .. }) => {
            ConditionVerdict::unsupported(UNSUPPORTED_CALLBACK)
        }
    }
}

fn check_rand(h_field: &PrescribedCurvature, obstacle: &Obstacle) -> ConditionVerdict {
    match obstacle {
        Obstacle::AllSpace => ConditionVerdict::pass_note("no boundary"),
        Obstacle::Ball { center, radius } => {
            let threshold = 1.0 / radius;
            match h_field {
                PrescribedCurvature::Constant(h) => {
                    ConditionVerdict::compare(h.abs(), threshold, false)
                }
                PrescribedCurvature::Radial { center: hc, table } => {
                    let d = v3::dist(*center, *hc);
                    let (lo, hi) = ((d - radius).abs(), d + radius);
                    let mut worst = profile_eval(table, lo).abs().max(profile_eval(table, hi).abs());
                    for &(r, h) in table {
                        if r >= lo && r <= hi {
                            worst = worst.max(h.abs());
                        }
                    }
                    ConditionVerdict::compare(worst, threshold, false)
                }
                PrescribedCurvature::Callback { eval, .. } => {
                    let worst = fibonacci_sphere(*center, *radius, 4096)
                        .into_iter()
                        .map(|p| eval(p).abs())
                        .fold(0.0, f64::max);
                    ConditionVerdict::compare(worst, threshold, false)
                        .with_note("boundary supremum sampled at 4096 points")
                }
            }
        }
    }
}

fn check_assum_uo(d0: f64, c: f64, s: Option<f64>) -> ConditionVerdict {
    match s {
        None => ConditionVerdict::pass_note("automatic for s = infinity"),
        Some(s) => ConditionVerdict::compare(2.0 * d0, s * (1.0 - c), false),
    }
}

/// Evaluate all admissibility conditions for the data of one run.
pub fn check_conditions(
    mesh: &DiskMesh,
    curve: &JordanCurve,
    obstacle: &Obstacle,
    h_field: &PrescribedCurvature,
    u0: &[V3],
    c: f64,
    s: Option<f64>,
) -> Result<ConditionReport, AdmissibilityError> {
    let sigma = sigma_factor(c, s)?;
    let d0 = dirichlet(mesh, u0);
    let sup = h_field.sup_bound();

    let zero = h_field.is_zero();
    let mk = |v: ConditionVerdict| if zero { ConditionVerdict::pass_note(ZERO_NOTE) } else { v };

    let h1 = mk(check_h1(sup, d0));
    let h2 = mk(check_h2(h_field, obstacle, sup));
    let h3 = mk(check_h3(obstacle, sup));
    let h4 = mk(check_h4(h_field, obstacle, sup, c));
    let rand = mk(check_rand(h_field, obstacle));
    let assum_uo = check_assum_uo(d0, c, s);

    let curve_in_obstacle = (0..512).all(|k| {
        let phi = std::f64::consts::TAU * k as f64 / 512.0;
        obstacle.contains(curve.eval(phi))
    });

    let overall = (h1.pass || h2.pass || h3.pass || h4.pass)
        && rand.pass
        && assum_uo.pass
        && curve_in_obstacle;

    Ok(ConditionReport {
        h1,
        h2,
        h3,
        h4,
        rand,
        assum_uo,
        c,
        s,
        sigma,
        h_sup_bound: sup,
        dirichlet_u0: d0,
        curve_in_obstacle,
        overall,
    })
}
