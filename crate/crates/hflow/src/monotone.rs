//! Weighted isotonic projection of the boundary phase vector, arc by arc
//! between the three locked anchors.

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MonotoneError {
    #[error("anchor values violate cyclic monotonicity")]
    InfeasibleAnchors,
    #[error("anchor index {0} out of range or duplicated")]
    BadAnchorIndex(usize),
}

/// Weighted pool-adjacent-violators: the nearest nondecreasing vector in the
/// weighted L2 sense. Stack of blocks, each carrying (weighted mean, weight).
pub fn pav_nondecreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        debug_assert!(w > 0.0, "isotonic weights must be positive");
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (mb, wb, nb) = blocks[blocks.len() - 1];
            let (ma, wa, na) = blocks[blocks.len() - 2];
            if ma <= mb {
                break;
            }
            blocks.pop();
            blocks.pop();
            let w = wa + wb;
            blocks.push(((ma * wa + mb * wb) / w, w, na + nb));
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, n) in blocks {
        out.extend(std::iter::repeat(m).take(n));
    }
    out
}

/// Projection of one open arc onto { lo <= x_1 <= ... <= x_n <= hi }:
/// isotonic regression followed by a clamp into the anchor interval, which
/// is the exact bounded-monotone projection.
pub fn project_arc(values: &[f64], weights: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    pav_nondecreasing(values, weights)
        .into_iter()
        .map(|v| v.clamp(lo, hi))
        .collect()
}

/// Project a cyclic phase vector onto the weakly monotone cone with the
/// three anchors locked. `anchors` holds (index, value) with strictly
/// increasing indices; the values must satisfy v0 <= v1 <= v2 <= v0 + 2*pi.
/// The wrap-around arc after the last anchor is bounded above by v0 + 2*pi.
pub fn project_monotone(
    phases: &[f64],
    weights: &[f64],
    anchors: &[(usize, f64); 3],
) -> Result<Vec<f64>, MonotoneError> {
    let n = phases.len();
    assert_eq!(n, weights.len());
    let [(i0, v0), (i1, v1), (i2, v2)] = *anchors;
    if !(i0 < i1 && i1 < i2 && i2 < n) {
        return Err(MonotoneError::BadAnchorIndex(i2.max(i1).max(i0)));
    }
    let tau = std::f64::consts::TAU;
    if !(v0 <= v1 && v1 <= v2 && v2 <= v0 + tau) {
        return Err(MonotoneError::InfeasibleAnchors);
    }
    let mut out = phases.to_vec();
    out[i0] = v0;
    out[i1] = v1;
    out[i2] = v2;
    // wrap is cyclic: indices before i0 belong to the tail of the last arc
    let arcs: [(usize, usize, f64, f64); 3] = [
        (i0, i1, v0, v1),
        (i1, i2, v1, v2),
        (i2, i0 + n, v2, v0 + tau),
    ];
    for (a, b, lo, hi) in arcs {
        if b - a < 2 {
            continue;
        }
        let idx: Vec<usize> = (a + 1..b).map(|j| j % n).collect();
        let vals: Vec<f64> = idx.iter().map(|&j| phases[j]).collect();
        let ws: Vec<f64> = idx.iter().map(|&j| weights[j]).collect();
        for (j, v) in idx.iter().zip(project_arc(&vals, &ws, lo, hi)) {
            out[*j] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn pav_pools_violators_to_weighted_means() {
        assert_eq!(pav_nondecreasing(&[2.0, 1.0], &[1.0, 1.0]), vec![1.5, 1.5]);
        assert_eq!(
            pav_nondecreasing(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0]),
            vec![2.0, 2.0, 2.0]
        );
        // weighted pooling: mean (3*1 + 1*3)/4 = 1.5
        assert_eq!(
            pav_nondecreasing(&[3.0, 1.0], &[1.0, 3.0]),
            vec![1.5, 1.5]
        );
        // feasible input is returned unchanged
        let v = vec![0.0, 0.25, 0.25, 1.0];
        assert_eq!(pav_nondecreasing(&v, &[1.0; 4]), v);
    }

    #[test]
    fn arc_examples() {
        // the [0,2,1,3] arc with anchors 0 and 3 at the ends
        let inner = project_arc(&[2.0, 1.0], &[1.0, 1.0], 0.0, 3.0);
        assert_eq!(inner, vec![1.5, 1.5]);
        // the [0,3,2,1,4] arc with anchors 0 and 4
        let inner = project_arc(&[3.0, 2.0, 1.0], &[1.0; 3], 0.0, 4.0);
        assert_eq!(inner, vec![2.0, 2.0, 2.0]);
        // clamping engages when pooled means escape the anchor interval
        let inner = project_arc(&[9.0, -5.0, 2.0], &[1.0; 3], 0.0, 3.0);
        assert!(inner.windows(2).all(|w| w[0] <= w[1]));
        assert!(inner.iter().all(|&x| (0.0..=3.0).contains(&x)));
    }

    fn locks() -> [(usize, f64); 3] {
        [(0, 0.0), (4, TAU / 3.0), (8, 2.0 * TAU / 3.0)]
    }

    #[test]
    fn cyclic_projection_locks_anchors_and_sorts_arcs() {
        let phases: Vec<f64> = vec![
            0.3, 1.0, 0.4, 1.9, // arc 0 interior jumbled, anchor at 0 off-value
            99.0, 2.5, 2.2, 3.0, // arc 1
            4.5, 4.4, 5.0, 7.0, // arc 2, last value above the wrap bound
        ];
        let w = vec![1.0; 12];
        let out = project_monotone(&phases, &w, &locks()).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[4], TAU / 3.0);
        assert_eq!(out[8], 2.0 * TAU / 3.0);
        for k in 0..12 {
            let next = if k + 1 == 12 { out[0] + TAU } else { out[k + 1] };
            assert!(out[k] <= next + 1e-15, "order broken at {k}");
        }
        assert!(out[11] <= TAU);

        // idempotence
        let again = project_monotone(&out, &w, &locks()).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn infeasible_anchor_values_are_rejected() {
        let w = vec![1.0; 12];
        let bad = [(0usize, 1.0), (4usize, 0.5), (8usize, 2.0)];
        assert_eq!(
            project_monotone(&vec![0.0; 12], &w, &bad),
            Err(MonotoneError::InfeasibleAnchors)
        );
        let bad_idx = [(0usize, 0.0), (4usize, 1.0), (12usize, 2.0)];
        assert_eq!(
            project_monotone(&vec![0.0; 12], &w, &bad_idx),
            Err(MonotoneError::BadAnchorIndex(12))
        );
    }

    /// Brute reference: exact minimizer over all consecutive-block partitions
    /// with clamped block means (the optimum is piecewise constant on blocks,
    /// so it appears in this enumeration).
    fn bounded_isotonic_oracle(v: &[f64], w: &[f64], lo: f64, hi: f64) -> Vec<f64> {
        let n = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0..(1u32 << (n - 1)) {
            let mut cand = Vec::with_capacity(n);
            let mut start = 0;
            for end in 0..n {
                let cut = end + 1 == n || (mask >> end) & 1 == 1;
                if cut {
                    let ww: f64 = w[start..=end].iter().sum();
                    let mean: f64 = v[start..=end]
                        .iter()
                        .zip(&w[start..=end])
                        .map(|(x, y)| x * y)
                        .sum::<f64>()
                        / ww;
                    let val = mean.clamp(lo, hi);
                    cand.extend(std::iter::repeat(val).take(end - start + 1));
                    start = end + 1;
                }
            }
            if cand.windows(2).any(|p| p[0] > p[1] + 1e-12) {
                continue;
            }
            let cost: f64 = cand
                .iter()
                .zip(v)
                .zip(w)
                .map(|((a, b), ww)| ww * (a - b) * (a - b))
                .sum();
            if best.as_ref().map_or(true, |(c, _)| cost < *c - 1e-15) {
                best = Some((cost, cand));
            }
        }
        best.unwrap().1
    }

    proptest! {
        #[test]
        fn pav_output_is_monotone_and_mean_preserving(
            vals in proptest::collection::vec(-5.0f64..5.0, 1..12),
            wsel in proptest::collection::vec(0.25f64..4.0, 1..12),
        ) {
            let n = vals.len().min(wsel.len());
            let v = &vals[..n];
            let w = &wsel[..n];
            let out = pav_nondecreasing(v, w);
            prop_assert!(out.windows(2).all(|p| p[0] <= p[1] + 1e-12));
            let m_in: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            let m_out: f64 = out.iter().zip(w).map(|(a, b)| a * b).sum();
            prop_assert!((m_in - m_out).abs() < 1e-9 * (1.0 + m_in.abs()));
            // idempotence
            prop_assert_eq!(pav_nondecreasing(&out, w), out);
        }

        #[test]
        fn bounded_projection_matches_partition_oracle(
            vals in proptest::collection::vec(-2.0f64..6.0, 2..8),
            wsel in proptest::collection::vec(0.5f64..2.0, 2..8),
        ) {
            let n = vals.len().min(wsel.len());
            let v = &vals[..n];
            let w = &wsel[..n];
            let (lo, hi) = (0.0, 4.0);
            let got = project_arc(v, w, lo, hi);
            let best = bounded_isotonic_oracle(v, w, lo, hi);
            let cost = |x: &[f64]| -> f64 {
                x.iter().zip(v).zip(w).map(|((a, b), ww)| ww * (a - b) * (a - b)).sum()
            };
            prop_assert!(cost(&got) <= cost(&best) + 1e-10);
            for (a, b) in got.iter().zip(&best) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
