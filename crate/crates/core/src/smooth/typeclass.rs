//! Type-class evaluation of smooth entropy for i.i.d. and mixed i.i.d.
//! binary sources.
//!
//! Every length-`n` binary sequence with `k` ones has the same probability
//! under each component, hence under the mixture, so the sorted sequence list
//! collapses into at most `n + 1` runs of equal atoms. Counts are carried as
//! log-binomials; a class's total mass `exp(ln C(n,k) + ln p_k)` is an
//! ordinary double even when the count itself overflows.

use super::check_delta;
use crate::dist::{kahan_sum, self_information_term, IidSpec, MixedSourceSpec};
use crate::error::{Error, Result};
use libm::lgamma as ln_gamma;
use std::f64::consts::LN_2;

/// Largest blocklength accepted by [`TypeClassTable`].
pub const MAX_TYPECLASS_N: usize = 10_000_000;

/// One type class: all sequences with `ones` ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClass {
    pub ones: usize,
    /// `ln C(n, ones)`.
    pub ln_count: f64,
    /// Natural log of the per-sequence probability under the mixture.
    pub ln_prob: f64,
    /// `exp(ln_count + ln_prob)`.
    pub mass: f64,
}

impl TypeClass {
    pub fn prob(&self) -> f64 {
        self.ln_prob.exp()
    }
}

/// Type classes of a (mixed) i.i.d. binary source, sorted by descending
/// per-sequence probability with ties broken by ascending `ones`. Classes of
/// zero probability are dropped.
#[derive(Debug, Clone)]
pub struct TypeClassTable {
    n: usize,
    classes: Vec<TypeClass>,
    /// `component_ln_probs[i][c]`: per-sequence log-probability of class `c`
    /// (in sorted position) under component `i`.
    component_ln_probs: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Where the `delta` budget runs out inside the sorted class list.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ClassPivot {
    /// Position of the pivot class in sorted order.
    pub pos: usize,
    /// Mass taken off the pivot atom itself.
    pub epsilon: f64,
    /// Pivot-class mass strictly before the pivot atom.
    pub kept_full: f64,
    /// `ln` of the pivot atom's 1-based index within its class.
    pub ln_t_star: f64,
    /// Mass of sequences ranked after `j*`; equals `delta - epsilon`.
    pub tail_mass: f64,
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `count * ln_q` with `0 * ln 0 = 0`.
fn scaled_ln(count: usize, ln_q: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_q
    }
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + kahan_sum(values.iter().map(|v| (v - max).exp())).ln()
}

impl TypeClassTable {
    pub fn iid(spec: &IidSpec) -> Result<Self> {
        Self::build(&[spec], &[1.0])
    }

    /// All components must be binary i.i.d. with a common blocklength.
    pub fn mixed(spec: &MixedSourceSpec) -> Result<Self> {
        let letters = spec.iid_letters()?;
        Self::build(&letters, spec.weights())
    }

    fn build(specs: &[&IidSpec], weights: &[f64]) -> Result<Self> {
        let n = specs[0].n;
        if n > MAX_TYPECLASS_N {
            return Err(Error::BlocklengthTooLarge {
                n,
                max: MAX_TYPECLASS_N,
            });
        }
        for s in specs {
            if s.single_letter.len() != 2 {
                return Err(Error::NotBinary(s.single_letter.len()));
            }
            if s.n != n {
                return Err(Error::BlocklengthMismatch(n, s.n));
            }
        }
        let ln_letters: Vec<(f64, f64)> = specs
            .iter()
            .map(|s| {
                let p = s.single_letter.probs();
                (p[0].ln(), p[1].ln())
            })
            .collect();

        let mut rows: Vec<(TypeClass, Vec<f64>)> = (0..=n)
            .map(|ones| {
                let per_component: Vec<f64> = ln_letters
                    .iter()
                    .map(|&(ln0, ln1)| scaled_ln(n - ones, ln0) + scaled_ln(ones, ln1))
                    .collect();
                let ln_prob = log_sum_exp(
                    per_component
                        .iter()
                        .zip(weights)
                        .filter(|(_, &w)| w > 0.0)
                        .map(|(lp, w)| lp + w.ln()),
                );
                let ln_count = ln_binomial(n, ones);
                let class = TypeClass {
                    ones,
                    ln_count,
                    ln_prob,
                    mass: (ln_count + ln_prob).exp(),
                };
                (class, per_component)
            })
            .filter(|(c, _)| c.ln_prob > f64::NEG_INFINITY)
            .collect();
        rows.sort_by(|a, b| b.0.ln_prob.total_cmp(&a.0.ln_prob));

        let mut component_ln_probs = vec![Vec::with_capacity(rows.len()); specs.len()];
        let mut classes = Vec::with_capacity(rows.len());
        for (class, per_component) in rows {
            for (dst, lp) in component_ln_probs.iter_mut().zip(per_component) {
                dst.push(lp);
            }
            classes.push(class);
        }
        Ok(Self {
            n,
            classes,
            component_ln_probs,
            weights: weights.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[TypeClass] {
        &self.classes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-sequence log-probabilities of component `i`, aligned with [`Self::classes`].
    pub fn component_ln_probs(&self, i: usize) -> &[f64] {
        &self.component_ln_probs[i]
    }

    /// Total mass; one up to rounding.
    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.classes.iter().map(|c| c.mass))
    }

    /// Tail masses after each class, smallest classes first.
    fn class_tails(&self) -> Vec<f64> {
        let masses: Vec<f64> = self.classes.iter().map(|c| c.mass).collect();
        super::tail_masses(&masses)
    }

    pub(crate) fn pivot(&self, delta: f64) -> ClassPivot {
        let tails = self.class_tails();
        let pos = super::pivot_rank(&tails, delta).min(self.classes.len() - 1);
        let class = &self.classes[pos];
        let tail_after = tails[pos];
        // Budget left for the pivot class, in [0, class mass).
        let budget = (delta - tail_after).clamp(0.0, class.mass);
        let p = class.prob();
        let count = class.ln_count.exp().round();

        let (epsilon, kept_full) = if p > 0.0 && (budget / p).is_finite() {
            // Whole atoms removed from the end of the class.
            let removed = (budget / p).floor().min((count - 1.0).max(0.0));
            let epsilon = (budget - removed * p).clamp(0.0, p);
            let kept_full = (class.mass - (budget - epsilon) - p).max(0.0);
            (epsilon, kept_full)
        } else {
            (0.0, (class.mass - budget).max(0.0))
        };
        let kept_in_class = class.mass - budget + epsilon;
        let ln_t_star = (kept_in_class.ln() - class.ln_prob).max(0.0);
        ClassPivot {
            pos,
            epsilon,
            kept_full,
            ln_t_star,
            tail_mass: tail_after + (budget - epsilon),
        }
    }

    /// Smooth entropy of the block distribution.
    pub fn smooth(&self, delta: f64) -> Result<TypeClassSmoothing> {
        check_delta(delta)?;
        let pivot = self.pivot(delta);
        let top = &self.classes[0];
        let total = self.total_mass();
        let p_top = top.prob();
        let ln_j_star = log_sum_exp(
            self.classes[..pivot.pos]
                .iter()
                .map(|c| c.ln_count)
                .chain(std::iter::once(pivot.ln_t_star)),
        );
        let summary = |h_nats: f64| TypeClassSmoothing {
            n: self.n,
            delta,
            h_bits: (h_nats / LN_2).max(0.0),
            pivot_ones: self.classes[pivot.pos].ones,
            log2_j_star: ln_j_star / LN_2,
            epsilon: pivot.epsilon,
        };

        if total - p_top <= delta {
            // The pivot is the top atom: the minimizer is a point mass.
            return Ok(summary(0.0));
        }

        let mut terms = Vec::with_capacity(pivot.pos + 4);
        for c in &self.classes[..pivot.pos] {
            terms.push(c.mass * -c.ln_prob);
        }
        let pc = &self.classes[pivot.pos];
        terms.push(pivot.kept_full * -pc.ln_prob);
        let residual = pc.prob() - pivot.epsilon;
        if residual > 0.0 {
            terms.push(-residual * residual.ln());
        }
        // The top atom carries p_top + delta instead of p_top.
        terms.push(-(p_top * -top.ln_prob));
        terms.push(self_information_term(p_top + delta));
        Ok(summary(kahan_sum(terms)))
    }
}

/// Smooth entropy computed over type classes.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassSmoothing {
    pub n: usize,
    pub delta: f64,
    /// `H_[delta](X^n)` in bits (not normalized by `n`).
    pub h_bits: f64,
    /// Number of ones in the class holding the pivot sequence.
    pub pivot_ones: usize,
    /// `log2 j*`; `j*` itself overflows doubles for large `n`.
    pub log2_j_star: f64,
    pub epsilon: f64,
}

impl TypeClassSmoothing {
    pub fn h_bits_per_symbol(&self) -> f64 {
        self.h_bits / self.n as f64
    }
}

/// `H_[delta](X^n) / n` in bits per symbol for a binary i.i.d. source.
pub fn smooth_entropy_iid(spec: &IidSpec, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(TypeClassTable::iid(spec)?
        .smooth(delta)?
        .h_bits_per_symbol())
}

/// `H_[delta](X^n) / n` for a mixture of binary i.i.d. components.
pub fn smooth_entropy_mixed_iid(spec: &MixedSourceSpec, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(TypeClassTable::mixed(spec)?
        .smooth(delta)?
        .h_bits_per_symbol())
}
