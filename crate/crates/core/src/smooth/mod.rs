//! Smooth entropy `H_[delta]`: the least Shannon entropy over the
//! variational-distance ball of radius `delta` around a distribution.
//!
//! The minimizer has a closed form. Sort the atoms by descending probability,
//! find the pivot rank `j*` at which the tail mass first drops to `delta`,
//! move `delta` onto the top atom, drop every atom after the pivot and take
//! the residual `epsilon` off the pivot atom. The result majorizes every
//! member of the ball, so by Schur concavity its entropy is the minimum.
//!
//! Submodules cover i.i.d. and mixed i.i.d. binary sources through type
//! classes ([`typeclass`]), the per-component budget allocation problem
//! ([`dagger`]) and the common-pivot component truncation used to compare
//! the mixture and per-component problems.

pub mod dagger;
pub mod typeclass;

pub use dagger::{
    allocation_witness, component_truncation, dagger_allocation, dagger_grid_min,
    dagger_smooth_entropy_finite, AllocationResult, AllocationWitness, ComponentTruncation,
    GridMinimum,
};
pub use typeclass::{
    smooth_entropy_iid, smooth_entropy_mixed_iid, TypeClass, TypeClassSmoothing, TypeClassTable,
};

use crate::dist::{descending_order, entropy_with_ln_base, self_information_term, FiniteDist};
use crate::error::{Error, Result};
use std::f64::consts::LN_2;

/// `2 log2(e) / e`, the slack between the common-pivot truncation and the
/// true minimizer (two atoms, each contributing at most `log2(e)/e`).
pub const TRUNCATION_SLACK_BITS: f64 = 2.0 * std::f64::consts::LOG2_E / std::f64::consts::E;

/// The minimizer of entropy over the `delta`-ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedResult {
    /// Minimizer, in the original atom order.
    pub v_delta: FiniteDist,
    pub h_bits: f64,
    /// Pivot rank, 1-based in sorted order.
    pub j_star: usize,
    /// Mass removed from the pivot atom, in `[0, p_(j*)]`.
    pub epsilon: f64,
    /// `sort_perm[rank]` is the original index of the atom at that rank.
    pub sort_perm: Vec<usize>,
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && (0.0..1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

/// `tails[j] = sum_{k > j} sorted[k]`, accumulated from the smallest atom up.
pub(crate) fn tail_masses(sorted: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; sorted.len()];
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in (0..sorted.len()).rev() {
        tails[j] = sum + comp;
        let v = sorted[j];
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    tails
}

/// 0-based pivot rank: the first `j` whose tail mass is at most `delta`.
pub(crate) fn pivot_rank(tails: &[f64], delta: f64) -> usize {
    tails.partition_point(|&t| t > delta)
}

/// Builds the entropy minimizer of the `delta`-ball around `p`.
pub fn smooth_min_entropy_dist(p: &FiniteDist, delta: f64) -> Result<SmoothedResult> {
    check_delta(delta)?;
    let sort_perm = p.descending_order();
    let sorted: Vec<f64> = sort_perm.iter().map(|&i| p.probs()[i]).collect();
    let tails = tail_masses(&sorted);
    let js = pivot_rank(&tails, delta);
    let epsilon = (delta - tails[js]).clamp(0.0, sorted[js]);

    let mut v = vec![0.0; p.len()];
    for (rank, &idx) in sort_perm.iter().enumerate().take(js + 1) {
        v[idx] = sorted[rank];
    }
    v[sort_perm[0]] += delta;
    v[sort_perm[js]] = (v[sort_perm[js]] - epsilon).max(0.0);

    let h_bits = entropy_with_ln_base(&v, LN_2);
    Ok(SmoothedResult {
        v_delta: FiniteDist::from_raw(v),
        h_bits,
        j_star: js + 1,
        epsilon,
        sort_perm,
    })
}

/// `H_[delta](p)` in bits, extended by `0` for `delta >= 1`.
pub fn smooth_entropy(p: &FiniteDist, delta: f64) -> Result<f64> {
    if delta.is_finite() && delta >= 1.0 {
        return Ok(0.0);
    }
    smooth_min_entropy_dist(p, delta).map(|r| r.h_bits)
}

/// Precomputed `delta -> H_[delta](p)` for repeated evaluation in `O(log N)`.
#[derive(Debug, Clone)]
pub struct SmoothEntropyCurve {
    sorted: Vec<f64>,
    tails: Vec<f64>,
    /// `body[j] = sum_{1 <= k <= j} sorted[k] ln(1/sorted[k])`, nats.
    body: Vec<f64>,
}

impl SmoothEntropyCurve {
    pub fn new(p: &FiniteDist) -> Self {
        let sorted: Vec<f64> = p.descending_order().iter().map(|&i| p.probs()[i]).collect();
        let tails = tail_masses(&sorted);
        let mut body = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        body.push(0.0);
        for &s in &sorted[1..] {
            acc += self_information_term(s);
            body.push(acc);
        }
        Self {
            sorted,
            tails,
            body,
        }
    }

    /// Smooth entropy in bits; any `delta >= 1 - max p` (including `delta >= 1`) gives 0.
    pub fn eval(&self, delta: f64) -> f64 {
        let delta = delta.max(0.0);
        if self.tails[0] <= delta {
            return 0.0;
        }
        let js = pivot_rank(&self.tails, delta);
        let epsilon = (delta - self.tails[js]).clamp(0.0, self.sorted[js]);
        let nats = self_information_term(self.sorted[0] + delta)
            + self.body[js - 1]
            + self_information_term(self.sorted[js] - epsilon);
        (nats / LN_2).max(0.0)
    }
}

/// True when `u` majorizes `v`: every partial sum of the descending
/// rearrangement of `u` is at least that of `v`, up to `tol`.
pub fn majorizes(u: &[f64], v: &[f64], tol: f64) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let su = descending_order(u);
    let sv = descending_order(v);
    let mut cu = 0.0;
    let mut cv = 0.0;
    for (a, b) in su.iter().zip(&sv) {
        cu += u[*a];
        cv += v[*b];
        if cu + tol < cv {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{entropy, variational_distance};

    fn d(v: &[f64]) -> FiniteDist {
        FiniteDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ternary_example() {
        let p = d(&[0.5, 0.3, 0.2]);
        let r = smooth_min_entropy_dist(&p, 0.25).unwrap();
        assert_eq!(r.j_star, 2);
        assert!((r.epsilon - 0.05).abs() < 1e-15);
        let expected = [0.75, 0.25, 0.0];
        for (a, b) in r.v_delta.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let h = 2.0 - 0.75 * 3f64.log2();
        assert!((r.h_bits - h).abs() < 1e-14);
        assert!((variational_distance(&p, &r.v_delta).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_delta_is_identity() {
        let p = d(&[0.1, 0.4, 0.2, 0.3]);
        let r = smooth_min_entropy_dist(&p, 0.0).unwrap();
        assert_eq!(r.v_delta, p);
        assert_eq!(r.j_star, 4);
        assert_eq!(r.epsilon, 0.0);
        assert!((r.h_bits - entropy(&p, 2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn uniform_ties_break_by_index() {
        let p = FiniteDist::uniform(4).unwrap();
        let r = smooth_min_entropy_dist(&p, 0.25).unwrap();
        assert_eq!(r.v_delta.probs(), &[0.5, 0.25, 0.25, 0.0]);
        assert_eq!(r.j_star, 3);
        assert_eq!(r.epsilon, 0.0);
        assert!((r.h_bits - 1.5).abs() < 1e-15);
        assert_eq!(r.sort_perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn large_delta_collapses_to_point_mass() {
        let p = d(&[0.2, 0.5, 0.3]);
        let r = smooth_min_entropy_dist(&p, 0.5).unwrap();
        assert_eq!(r.j_star, 1);
        assert!((r.v_delta.probs()[1] - 1.0).abs() < 1e-15);
        assert_eq!(r.h_bits, 0.0);
        assert!((variational_distance(&p, &r.v_delta).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_delta_outside_unit_interval() {
        let p = d(&[0.5, 0.5]);
        assert!(matches!(
            smooth_min_entropy_dist(&p, 1.0),
            Err(Error::InvalidDelta(_))
        ));
        assert!(smooth_min_entropy_dist(&p, -0.1).is_err());
        assert!(smooth_min_entropy_dist(&p, f64::NAN).is_err());
        assert_eq!(smooth_entropy(&p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn residual_mass_stays_in_range() {
        let p = d(&[0.05, 0.15, 0.35, 0.25, 0.2]);
        for k in 0..100 {
            let delta = k as f64 / 100.0;
            let r = smooth_min_entropy_dist(&p, delta).unwrap();
            let sorted: Vec<f64> = r.sort_perm.iter().map(|&i| p.probs()[i]).collect();
            let head: f64 = sorted[..r.j_star - 1].iter().sum();
            assert!(head < 1.0 - delta + 1e-15);
            assert!(head + sorted[r.j_star - 1] >= 1.0 - delta - 1e-15);
            assert!(r.epsilon >= 0.0 && r.epsilon <= sorted[r.j_star - 1]);
            let tail: f64 = sorted[r.j_star..].iter().sum();
            assert!((r.epsilon - (delta - tail)).abs() < 1e-12 || r.epsilon == 0.0);
            assert!(majorizes(r.v_delta.probs(), p.probs(), 1e-12));
        }
    }

    #[test]
    fn curve_matches_construction() {
        let p = d(&[0.05, 0.15, 0.35, 0.25, 0.2]);
        let curve = SmoothEntropyCurve::new(&p);
        for k in 0..=120 {
            let delta = k as f64 / 120.0;
            let want = smooth_entropy(&p, delta).unwrap();
            assert!((curve.eval(delta) - want).abs() < 1e-12, "delta {delta}");
        }
        assert_eq!(curve.eval(1.7), 0.0);
    }

    #[test]
    fn majorization_basics() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5], 0.0));
        assert!(!majorizes(&[0.5, 0.5], &[1.0, 0.0], 0.0));
        assert!(majorizes(&[0.2, 0.8], &[0.8, 0.2], 1e-15));
        assert!(!majorizes(&[1.0], &[0.5, 0.5], 0.0));
    }
}
