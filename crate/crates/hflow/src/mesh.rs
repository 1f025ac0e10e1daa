//! Structured triangulation of the closed unit disk with P1 calculus.
//!
//! The generator lays vertices on concentric rings. The boundary ring comes
//! first in the vertex numbering (ids `0..n_boundary`, counterclockwise,
//! starting at angle 0), then the interior rings from outermost to
//! innermost, and the center vertex last. Ring vertex counts are multiples
//! of 3 so that radial lines through the three anchor angles 2πk/3 always
//! hit vertices, and each ring's angle list contains the anchor angles
//! bit-exactly.

use crate::v3::{V2, V3};
use std::f64::consts::TAU;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("n_boundary must be >= 6 and divisible by 3, got {0}")]
    BadBoundaryCount(usize),
    #[error("n_rings must be >= 1, got {0}")]
    BadRingCount(usize),
}

/// Triangulated unit disk. Immutable after construction.
#[derive(Debug, Clone)]
pub struct DiskMesh {
    /// Vertex coordinates in the parameter disk, |x| <= 1.
    pub vertices: Vec<V2>,
    /// Counterclockwise triangles (positive signed area).
    pub triangles: Vec<[usize; 3]>,
    /// Boundary vertex ids in counterclockwise loop order with their angles.
    /// Always `(j, theta_j)` for `j in 0..n_boundary` with this generator.
    pub boundary_loop: Vec<(usize, f64)>,
    /// Boundary ids at angles 2πk/3 for k = 1, 2, 3 (the last one at angle 0).
    pub anchor_indices: [usize; 3],
    /// Per-vertex lumped area weights; sums to the mesh area.
    pub lumped_mass: Vec<f64>,
    /// Per-triangle area.
    pub tri_area: Vec<f64>,
    /// Per-triangle barycentric gradients: `tri_grad[t][k]` is the 2D
    /// gradient of the hat function of corner k.
    pub tri_grad: Vec<[V2; 3]>,
    pub n_boundary: usize,
    pub n_rings: usize,
}

/// Vertex count of ring `r` out of `n_rings`: round-half-up of
/// n_boundary*r/(3*n_rings) scaled by 3, at least 3. Ties round up so the
/// counts never decrease outward.
fn ring_count(n_boundary: usize, n_rings: usize, r: usize) -> usize {
    let m = (2 * n_boundary * r + 3 * n_rings) / (6 * n_rings);
    3 * m.max(1)
}

/// Angles of a ring with `c` vertices (c divisible by 3): the ring is three
/// arcs anchored at 2πk/3 so the anchor angles are exact in f64.
fn ring_angles(c: usize) -> Vec<f64> {
    let third = c / 3;
    (0..c)
        .map(|j| {
            let (k, rem) = (j / third, j % third);
            TAU * k as f64 / 3.0 + TAU * rem as f64 / c as f64
        })
        .collect()
}

pub fn build_disk_mesh(n_boundary: usize, n_rings: usize) -> Result<DiskMesh, MeshError> {
    if n_boundary < 6 || n_boundary % 3 != 0 {
        return Err(MeshError::BadBoundaryCount(n_boundary));
    }
    if n_rings < 1 {
        return Err(MeshError::BadRingCount(n_rings));
    }

    // counts[i] is the vertex count of ring i+1 (innermost has r = 1).
    let counts: Vec<usize> = (1..=n_rings)
        .map(|r| ring_count(n_boundary, n_rings, r))
        .collect();
    debug_assert_eq!(counts[n_rings - 1], n_boundary);

    let total: usize = counts.iter().sum::<usize>() + 1;
    let mut vertices: Vec<V2> = Vec::with_capacity(total);
    // start id of ring r (1-based), boundary ring first
    let ring_start = |r: usize| -> usize { counts[r..].iter().sum() };
    let mut ring_ang: Vec<Vec<f64>> = Vec::with_capacity(n_rings);
    for r in (1..=n_rings).rev() {
        let ang = ring_angles(counts[r - 1]);
        let rad = r as f64 / n_rings as f64;
        for &a in &ang {
            vertices.push([rad * a.cos(), rad * a.sin()]);
        }
        ring_ang.push(ang);
    }
    ring_ang.reverse(); // ring_ang[r-1] now belongs to ring r
    let center = vertices.len();
    vertices.push([0.0, 0.0]);

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * total);
    // center fan against ring 1
    let c0 = counts[0];
    let s0 = ring_start(1);
    for j in 0..c0 {
        triangles.push([center, s0 + j, s0 + (j + 1) % c0]);
    }
    // advancing-front strips between consecutive rings
    for r in 1..n_rings {
        let (ca, cb) = (counts[r - 1], counts[r]);
        let (sa, sb) = (ring_start(r), ring_start(r + 1));
        let (ang_a, ang_b) = (&ring_ang[r - 1], &ring_ang[r]);
        let (mut i, mut j) = (0usize, 0usize);
        while i < ca || j < cb {
            let next_a = if i + 1 < ca { ang_a[i + 1] } else { TAU };
            let next_b = if j + 1 < cb { ang_b[j + 1] } else { TAU };
            let advance_outer = j < cb && (next_b <= next_a || i == ca);
            if advance_outer {
                triangles.push([sa + i % ca, sb + j, sb + (j + 1) % cb]);
                j += 1;
            } else {
                triangles.push([sa + i, sb + j % cb, sa + (i + 1) % ca]);
                i += 1;
            }
        }
    }

    // per-triangle geometry
    let nt = triangles.len();
    let mut tri_area = Vec::with_capacity(nt);
    let mut tri_grad = Vec::with_capacity(nt);
    let mut lumped_mass = vec![0.0; vertices.len()];
    for t in &triangles {
        let [p0, p1, p2] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
        let e1 = [p1[0] - p0[0], p1[1] - p0[1]];
        let e2 = [p2[0] - p0[0], p2[1] - p0[1]];
        let two_a = e1[0] * e2[1] - e1[1] * e2[0];
        assert!(two_a > 0.0, "generator produced a non-CCW triangle");
        let area = 0.5 * two_a;
        // gradient of hat k is perp(edge opposite k) / 2A
        let perp = |a: V2, b: V2| [-(b[1] - a[1]) / two_a, (b[0] - a[0]) / two_a];
        tri_grad.push([perp(p1, p2), perp(p2, p0), perp(p0, p1)]);
        tri_area.push(area);
        for &v in t {
            lumped_mass[v] += area / 3.0;
        }
    }

    let bang = ring_angles(n_boundary);
    let boundary_loop: Vec<(usize, f64)> = bang.iter().copied().enumerate().collect();
    let anchor_indices = [n_boundary / 3, 2 * n_boundary / 3, 0];

    Ok(DiskMesh {
        vertices,
        triangles,
        boundary_loop,
        anchor_indices,
        lumped_mass,
        tri_area,
        tri_grad,
        n_boundary,
        n_rings,
    })
}

impl DiskMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Boundary vertices occupy ids 0..n_boundary.
    pub fn is_boundary(&self, v: usize) -> bool {
        v < self.n_boundary
    }

    pub fn area(&self) -> f64 {
        self.tri_area.iter().sum()
    }

    /// Constant gradient of the P1 interpolant of `u` on triangle `t`,
    /// split into the two coordinate directions of the parameter disk.
    pub fn p1_gradient(&self, u: &[V3], t: usize) -> (V3, V3) {
        let tri = self.triangles[t];
        let g = self.tri_grad[t];
        let mut d1 = [0.0; 3];
        let mut d2 = [0.0; 3];
        for k in 0..3 {
            let uv = u[tri[k]];
            for c in 0..3 {
                d1[c] += g[k][0] * uv[c];
                d2[c] += g[k][1] * uv[c];
            }
        }
        (d1, d2)
    }

    /// Same for a 2D per-vertex field (used by the inner-variation tests).
    pub fn p1_gradient_2d(&self, eta: &[V2], t: usize) -> (V2, V2) {
        let tri = self.triangles[t];
        let g = self.tri_grad[t];
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for k in 0..3 {
            let ev = eta[tri[k]];
            for c in 0..2 {
                d1[c] += g[k][0] * ev[c];
                d2[c] += g[k][1] * ev[c];
            }
        }
        (d1, d2)
    }

    /// Lumped-mass inner product of two per-vertex vector fields. Summed with
    /// compensation: the proximal term feeds the line search, which must
    /// resolve energy differences near rounding level.
    pub fn l2_inner(&self, u: &[V3], v: &[V3]) -> f64 {
        assert_eq!(u.len(), self.vertices.len(), "l2_inner size mismatch");
        assert_eq!(v.len(), self.vertices.len(), "l2_inner size mismatch");
        let vals: Vec<f64> = (0..u.len())
            .map(|i| self.lumped_mass[i] * crate::v3::dot(u[i], v[i]))
            .collect();
        crate::v3::compensated_sum(&vals)
    }

    pub fn l2_norm(&self, u: &[V3]) -> f64 {
        self.l2_inner(u, u).sqrt()
    }

    /// L2 distance between two surfaces in the lumped metric.
    pub fn l2_dist(&self, u: &[V3], v: &[V3]) -> f64 {
        let vals: Vec<f64> = (0..u.len())
            .map(|i| {
                let d = crate::v3::sub(u[i], v[i]);
                self.lumped_mass[i] * crate::v3::dot(d, d)
            })
            .collect();
        crate::v3::compensated_sum(&vals).sqrt()
    }
}
