//! Dirichlet energy, curvature volume, the time-discrete functional and its
//! gradient, plus the conformality diagnostics built on the Hopf field.

use crate::curvature::PrescribedCurvature;
use crate::mesh::DiskMesh;
use crate::obstacle::Obstacle;
use crate::v3::{self, V2, V3};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EnergyError {
    #[error("{surface} vertex {vertex} lies outside the obstacle")]
    OutsideObstacle { surface: &'static str, vertex: usize },
    #[error("test field is not admissible at vertex {vertex}: {reason}")]
    NonAdmissibleField { vertex: usize, reason: String },
}

/// Gauss-Legendre nodes/weights on the unit interval.
pub fn gauss_unit(n: usize) -> Vec<(f64, f64)> {
    match n {
        1 => vec![(0.5, 1.0)],
        2 => {
            let d = 0.5 / f64::sqrt(3.0);
            vec![(0.5 - d, 0.5), (0.5 + d, 0.5)]
        }
        4 => {
            let x1 = 0.339_981_043_584_856_3;
            let x2 = 0.861_136_311_594_052_6;
            let w1 = 0.652_145_154_862_546_1;
            let w2 = 0.347_854_845_137_453_9;
            [-x2, -x1, x1, x2]
                .iter()
                .zip([w2, w1, w1, w2])
                .map(|(x, w)| ((1.0 + x) / 2.0, w / 2.0))
                .collect()
        }
        _ => panic!("unsupported Gauss order {n}"),
    }
}

/// Symmetric triangle rules in barycentric coordinates, weights sum to 1.
/// Orders: 1 (centroid), 2 (midedge, exact for quadratics), 4 (six-point).
pub fn tri_rule(order: usize) -> Vec<([f64; 3], f64)> {
    match order {
        1 => vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)],
        2 => {
            let h = 0.5;
            vec![
                ([h, h, 0.0], 1.0 / 3.0),
                ([0.0, h, h], 1.0 / 3.0),
                ([h, 0.0, h], 1.0 / 3.0),
            ]
        }
        4 => {
            let a1 = 0.445_948_490_915_965;
            let w1 = 0.223_381_589_678_011;
            let a2 = 0.091_576_213_509_771;
            let w2 = 0.109_951_743_655_322;
            let mut pts = Vec::with_capacity(6);
            for (a, w) in [(a1, w1), (a2, w2)] {
                let b = 1.0 - 2.0 * a;
                pts.push(([a, a, b], w));
                pts.push(([a, b, a], w));
                pts.push(([b, a, a], w));
            }
            pts
        }
        _ => panic!("unsupported triangle rule order {order}"),
    }
}

/// Quadrature orders that integrate the homotopy volume exactly for
/// constant H and P1 surfaces; one refinement level above for variable H.
pub fn default_orders(h_field: &PrescribedCurvature) -> (usize, usize) {
    if h_field.is_constant() {
        (2, 2)
    } else {
        (4, 4)
    }
}

const PAR_THRESHOLD: usize = 512;

use crate::v3::compensated_sum;

/// Per-triangle map followed by an order-fixed compensated sum; the parallel
/// and serial paths produce the same value sequence, so results are
/// bit-identical.
fn tri_sum<F>(mesh: &DiskMesh, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let nt = mesh.triangles.len();
    let vals: Vec<f64> = if nt >= PAR_THRESHOLD {
        (0..nt).into_par_iter().map(&f).collect()
    } else {
        (0..nt).map(f).collect()
    };
    compensated_sum(&vals)
}

/// Per-triangle corner contributions scattered into a vertex field, again
/// with a deterministic accumulation order.
fn tri_scatter<F>(mesh: &DiskMesh, f: F) -> Vec<V3>
where
    F: Fn(usize) -> [V3; 3] + Sync,
{
    let nt = mesh.triangles.len();
    let per_tri: Vec<[V3; 3]> = if nt >= PAR_THRESHOLD {
        (0..nt).into_par_iter().map(&f).collect()
    } else {
        (0..nt).map(f).collect()
    };
    let mut out = vec![[0.0; 3]; mesh.vertex_count()];
    for (t, contribs) in per_tri.iter().enumerate() {
        for (k, c) in contribs.iter().enumerate() {
            let vtx = mesh.triangles[t][k];
            out[vtx] = v3::add(out[vtx], *c);
        }
    }
    out
}

fn require_inside(
    obstacle: &Obstacle,
    u: &[V3],
    surface: &'static str,
) -> Result<(), EnergyError> {
    for (i, p) in u.iter().enumerate() {
        if !obstacle.contains(*p) {
            return Err(EnergyError::OutsideObstacle { surface, vertex: i });
        }
    }
    Ok(())
}

/// D(u) = (1/2) sum_t area_t (|D1 u|^2 + |D2 u|^2).
pub fn dirichlet(mesh: &DiskMesh, u: &[V3]) -> f64 {
    0.5 * tri_sum(mesh, |t| {
        let (d1, d2) = mesh.p1_gradient(u, t);
        mesh.tri_area[t] * (v3::dot(d1, d1) + v3::dot(d2, d2))
    })
}

/// Exact gradient of `dirichlet` in the vertex values (stiffness action).
pub fn dirichlet_gradient(mesh: &DiskMesh, u: &[V3]) -> Vec<V3> {
    tri_scatter(mesh, |t| {
        let (d1, d2) = mesh.p1_gradient(u, t);
        let a = mesh.tri_area[t];
        let g = &mesh.tri_grad[t];
        std::array::from_fn(|k| {
            v3::scale(v3::axpy(v3::scale(d1, g[k][0]), g[k][1], d2), a)
        })
    })
}

/// V_H(u, v) along the straight-line homotopy U(s) = (1-s)v + su:
/// the double integral of H(U) <U_s, U_x1 x U_x2>. Convexity of the obstacle
/// keeps the whole homotopy inside it, which is what makes this legitimate.
pub fn h_volume(
    mesh: &DiskMesh,
    u: &[V3],
    v: &[V3],
    h_field: &PrescribedCurvature,
    obstacle: &Obstacle,
    q_s: usize,
    q_x: usize,
) -> Result<f64, EnergyError> {
    require_inside(obstacle, u, "first")?;
    require_inside(obstacle, v, "second")?;
    let sg = gauss_unit(q_s);
    let xr = tri_rule(q_x);
    Ok(tri_sum(mesh, |t| {
        let [i, j, k] = mesh.triangles[t];
        let (du1, du2) = mesh.p1_gradient(u, t);
        let (dv1, dv2) = mesh.p1_gradient(v, t);
        let area = mesh.tri_area[t];
        let mut acc = 0.0;
        for &(s, ws) in &sg {
            let d1 = v3::lerp(dv1, du1, s);
            let d2 = v3::lerp(dv2, du2, s);
            let cr = v3::cross(d1, d2);
            for &(b, wx) in &xr {
                let up = v3::bary(u[i], u[j], u[k], b);
                let vp = v3::bary(v[i], v[j], v[k], b);
                let w = v3::sub(up, vp);
                let pt = v3::lerp(vp, up, s);
                acc += ws * wx * h_field.eval(pt) * v3::dot(w, cr);
            }
        }
        area * acc
    }))
}

/// |V_H(u~,u) + V_H(u,v) - V_H(u~,v)|. Exact-quadrature zero for constant H
/// when the three surfaces share a boundary trace; a quadrature diagnostic
/// otherwise.
pub fn volume_additivity_defect(
    mesh: &DiskMesh,
    u_tilde: &[V3],
    u: &[V3],
    v: &[V3],
    h_field: &PrescribedCurvature,
    obstacle: &Obstacle,
    q_s: usize,
    q_x: usize,
) -> Result<f64, EnergyError> {
    let a = h_volume(mesh, u_tilde, u, h_field, obstacle, q_s, q_x)?;
    let b = h_volume(mesh, u, v, h_field, obstacle, q_s, q_x)?;
    let c = h_volume(mesh, u_tilde, v, h_field, obstacle, q_s, q_x)?;
    Ok((a + b - c).abs())
}

/// Load vector of the curvature term: the discrete 2 H(u) D1u x D2u pairing,
/// distributed to vertices by barycentric weights. For constant H one
/// centroid evaluation per triangle is the exact gradient of 2 V_H(., v)
/// (shared boundary traces); for variable H the load integrates H(u) with
/// the same triangle rule the volume quadrature uses, so the gradient tracks
/// the functional actually being minimized rather than its continuum limit.
pub fn h_load(mesh: &DiskMesh, u: &[V3], h_field: &PrescribedCurvature) -> Vec<V3> {
    if h_field.is_constant() {
        return tri_scatter(mesh, |t| {
            let [i, j, k] = mesh.triangles[t];
            let (d1, d2) = mesh.p1_gradient(u, t);
            let centroid =
                v3::scale(v3::add(v3::add(u[i], u[j]), u[k]), 1.0 / 3.0);
            let f = 2.0 * h_field.eval(centroid) * mesh.tri_area[t] / 3.0;
            let c = v3::scale(v3::cross(d1, d2), f);
            [c, c, c]
        });
    }
    let (_, q_x) = default_orders(h_field);
    let rule = tri_rule(q_x);
    tri_scatter(mesh, |t| {
        let [i, j, k] = mesh.triangles[t];
        let (d1, d2) = mesh.p1_gradient(u, t);
        let cr = v3::cross(d1, d2);
        let a = mesh.tri_area[t];
        let mut out = [[0.0; 3]; 3];
        for &(b, w) in &rule {
            let pt = v3::bary(u[i], u[j], u[k], b);
            let f = 2.0 * h_field.eval(pt) * a * w;
            for (slot, lam) in out.iter_mut().zip(b) {
                *slot = v3::add(*slot, v3::scale(cr, f * lam));
            }
        }
        out
    })
}

/// F(u) = D(u) + 2 V_H(u, u0) + (1/2h) ||u - z||^2 with the lumped mass.
pub fn f_value(
    mesh: &DiskMesh,
    u: &[V3],
    u0: &[V3],
    z: &[V3],
    h: f64,
    h_field: &PrescribedCurvature,
    obstacle: &Obstacle,
) -> Result<f64, EnergyError> {
    assert!(h > 0.0, "time step must be positive");
    require_inside(obstacle, z, "proximal")?;
    let (q_s, q_x) = default_orders(h_field);
    let vol = h_volume(mesh, u, u0, h_field, obstacle, q_s, q_x)?;
    let d = dirichlet(mesh, u);
    let diff: Vec<V3> = u.iter().zip(z).map(|(a, b)| v3::sub(*a, *b)).collect();
    let prox = mesh.l2_inner(&diff, &diff) / (2.0 * h);
    Ok(d + 2.0 * vol + prox)
}

/// Gradient of `f_value` in the vertex values: lumped-mass (u-z)/h plus the
/// stiffness action plus the curvature load.
pub fn f_gradient(
    mesh: &DiskMesh,
    u: &[V3],
    z: &[V3],
    h: f64,
    h_field: &PrescribedCurvature,
) -> Vec<V3> {
    assert!(h > 0.0, "time step must be positive");
    let rate: Vec<V3> = u
        .iter()
        .zip(z)
        .map(|(a, b)| v3::scale(v3::sub(*a, *b), 1.0 / h))
        .collect();
    f_gradient_with_rate(mesh, u, &rate, h_field)
}

/// Same gradient with the rate term (u-z)/h supplied directly; passing zeros
/// gives the gradient of the stationary functional.
pub fn f_gradient_with_rate(
    mesh: &DiskMesh,
    u: &[V3],
    rate: &[V3],
    h_field: &PrescribedCurvature,
) -> Vec<V3> {
    let mut g = dirichlet_gradient(mesh, u);
    let load = h_load(mesh, u, h_field);
    for i in 0..g.len() {
        let prox = v3::scale(rate[i], mesh.lumped_mass[i]);
        g[i] = v3::add(v3::add(g[i], load[i]), prox);
    }
    g
}

/// Per-triangle Hopf field (re, im) = (|D1u|^2 - |D2u|^2, -2 D1u . D2u).
/// Zero exactly on the triangles where the map is conformal.
pub fn hopf(mesh: &DiskMesh, u: &[V3]) -> Vec<[f64; 2]> {
    (0..mesh.triangles.len())
        .map(|t| {
            let (d1, d2) = mesh.p1_gradient(u, t);
            [
                v3::dot(d1, d1) - v3::dot(d2, d2),
                -2.0 * v3::dot(d1, d2),
            ]
        })
        .collect()
}

/// L1 norm of the Hopf field: sum_t area_t |h_t|.
pub fn hopf_residual(mesh: &DiskMesh, u: &[V3]) -> f64 {
    tri_sum(mesh, |t| {
        let (d1, d2) = mesh.p1_gradient(u, t);
        let re = v3::dot(d1, d1) - v3::dot(d2, d2);
        let im = -2.0 * v3::dot(d1, d2);
        mesh.tri_area[t] * f64::hypot(re, im)
    })
}

/// Checks that a parameter-domain field is an admissible inner variation:
/// tangential at boundary vertices and zero at the anchors.
pub fn check_admissible_field(mesh: &DiskMesh, eta: &[V2]) -> Result<(), EnergyError> {
    for &(i, _) in &mesh.boundary_loop {
        let pos = mesh.vertices[i];
        let radial = eta[i][0] * pos[0] + eta[i][1] * pos[1];
        if radial.abs() > 1e-10 {
            return Err(EnergyError::NonAdmissibleField {
                vertex: i,
                reason: format!("boundary field has radial component {radial:.3e}"),
            });
        }
    }
    for &a in &mesh.anchor_indices {
        let n = f64::hypot(eta[a][0], eta[a][1]);
        if n > 1e-10 {
            return Err(EnergyError::NonAdmissibleField {
                vertex: a,
                reason: format!("field does not vanish at an anchor (|eta| = {n:.3e})"),
            });
        }
    }
    Ok(())
}

/// Inner-variation pairing: integral of Re(hopf * dbar eta) plus the
/// integral of f . (eta1 D1u + eta2 D2u). Vanishes at stationary points.
pub fn inner_variation_residual(
    mesh: &DiskMesh,
    u: &[V3],
    f: &[V3],
    eta: &[V2],
) -> Result<f64, EnergyError> {
    check_admissible_field(mesh, eta)?;
    let xr = tri_rule(2);
    Ok(tri_sum(mesh, |t| {
        let [i, j, k] = mesh.triangles[t];
        let area = mesh.tri_area[t];
        let (d1, d2) = mesh.p1_gradient(u, t);
        let re = v3::dot(d1, d1) - v3::dot(d2, d2);
        let im = -2.0 * v3::dot(d1, d2);
        // dbar eta = (1/2)(d1 eta + i d2 eta) on eta = eta1 + i eta2
        let (e1, e2) = mesh.p1_gradient_2d(eta, t);
        let p = 0.5 * (e1[0] - e2[1]);
        let q = 0.5 * (e1[1] + e2[0]);
        let mut acc = area * (re * p - im * q);
        for &(b, wx) in &xr {
            let fp = v3::bary(f[i], f[j], f[k], b);
            let ep = [
                b[0] * eta[i][0] + b[1] * eta[j][0] + b[2] * eta[k][0],
                b[0] * eta[i][1] + b[1] * eta[j][1] + b[2] * eta[k][1],
            ];
            let du_eta = v3::axpy(v3::scale(d1, ep[0]), ep[1], d2);
            acc += wx * area * v3::dot(fp, du_eta);
        }
        acc
    }))
}

/// Pointwise magnitude of the discrete mean curvature of the embedded
/// surface: cotangent weights on the 3D positions, barycentric vertex areas.
/// Meaningful at interior vertices away from the boundary layer.
pub fn discrete_mean_curvature(mesh: &DiskMesh, u: &[V3]) -> Vec<f64> {
    let nv = mesh.vertex_count();
    let mut hvec = vec![[0.0f64; 3]; nv];
    let mut amix = vec![0.0f64; nv];
    for tri in &mesh.triangles {
        let [i, j, k] = *tri;
        let area3 = 0.5
            * v3::norm(v3::cross(v3::sub(u[j], u[i]), v3::sub(u[k], u[i])));
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            // cotangent of the angle at c, opposite the edge (a, b)
            let ca = v3::sub(u[a], u[c]);
            let cb = v3::sub(u[b], u[c]);
            let cross_n = v3::norm(v3::cross(ca, cb));
            if cross_n < 1e-300 {
                continue;
            }
            let w = v3::dot(ca, cb) / cross_n;
            let e = v3::scale(v3::sub(u[a], u[b]), w / 2.0);
            hvec[a] = v3::add(hvec[a], e);
            hvec[b] = v3::sub(hvec[b], e);
        }
        for v in [i, j, k] {
            amix[v] += area3 / 3.0;
        }
    }
    (0..nv)
        .map(|i| {
            if amix[i] > 0.0 {
                v3::norm(hvec[i]) / (2.0 * amix[i])
            } else {
                0.0
            }
        })
        .collect()
}
