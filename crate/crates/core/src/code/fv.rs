//! δ-error fixed-to-variable source codes.
//!
//! The encoder keeps the `j*` most probable sequences (the same pivot rank as
//! the smooth entropy minimizer) and declares an error on everything else.
//! Kept sequences get Shannon lengths `ceil(log_K 1/P'(x))` under the kept set
//! renormalized to a distribution `P'`.

use super::{ceil_snapped, check_coin, log_k};
use crate::dist::{kahan_sum, FiniteDist};
use crate::error::{Error, Result};
use crate::smooth::typeclass::log_sum_exp;
use crate::smooth::{check_delta, pivot_rank, tail_masses, TypeClassTable};

/// A δ-error FV code over an explicit block distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FvCode {
    pub k: u32,
    pub n: usize,
    /// Original indices of the kept sequences, most probable first.
    pub kept: Vec<usize>,
    /// Codeword length of each kept sequence, aligned with `kept`.
    pub lengths: Vec<u32>,
    /// Probability that the source emits a sequence outside the kept set.
    pub error: f64,
    /// `sum_{kept} P(x) len(x)` in `K`-ary symbols.
    pub expected_length: f64,
    /// `sum_{kept} K^{-len(x)}`.
    pub kraft: f64,
}

impl FvCode {
    /// Expected length per source symbol.
    pub fn rate(&self) -> f64 {
        self.expected_length / self.n as f64
    }
}

fn length_for(kept_mass_ln: f64, ln_p: f64, k: u32) -> Result<u32> {
    let ratio_ln = (kept_mass_ln - ln_p).max(0.0);
    let raw = if k == 2 {
        ratio_ln / std::f64::consts::LN_2
    } else {
        ratio_ln / f64::from(k).ln()
    };
    let len = ceil_snapped(raw);
    if !(len >= 0.0 && len < f64::from(u32::MAX)) {
        return Err(Error::InvariantViolation(format!(
            "codeword length {len} out of range"
        )));
    }
    Ok(len as u32)
}

/// Builds the δ-error FV code for the block distribution `p` of length-`n` sequences.
pub fn build_fv_code(p: &FiniteDist, k: u32, n: usize, delta: f64) -> Result<FvCode> {
    check_coin(k)?;
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::ZeroBlocklength);
    }
    let order = p.descending_order();
    let sorted: Vec<f64> = order.iter().map(|&i| p.probs()[i]).collect();
    let tails = tail_masses(&sorted);
    let js = pivot_rank(&tails, delta);
    // Zero-probability atoms never need a codeword.
    let kept_count = sorted[..=js].iter().take_while(|&&q| q > 0.0).count();
    let kept: Vec<usize> = order[..kept_count].to_vec();
    let error = tails[js];
    let kept_mass = kahan_sum(sorted[..kept_count].iter().copied());
    if kept_mass < 1.0 - delta - 1e-12 {
        return Err(Error::InvariantViolation(format!(
            "kept mass {kept_mass} below 1 - delta"
        )));
    }

    let lengths = sorted[..kept_count]
        .iter()
        .map(|&q| {
            let len = ceil_snapped(log_k(kept_mass / q, k).max(0.0));
            if len < f64::from(u32::MAX) {
                Ok(len as u32)
            } else {
                Err(Error::InvariantViolation(format!(
                    "codeword length {len} out of range"
                )))
            }
        })
        .collect::<Result<Vec<u32>>>()?;
    let expected_length = kahan_sum(
        sorted[..kept_count]
            .iter()
            .zip(&lengths)
            .map(|(&q, &l)| q * f64::from(l)),
    );
    let kraft = kahan_sum(lengths.iter().map(|&l| f64::from(k).powi(-(l as i32))));
    Ok(FvCode {
        k,
        n,
        kept,
        lengths,
        error,
        expected_length,
        kraft,
    })
}

/// A δ-error FV code for a (mixed) i.i.d. binary source, summarized per type class.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassFvCode {
    pub k: u32,
    pub n: usize,
    /// `log2` of the number of kept sequences.
    pub log2_kept: f64,
    pub error: f64,
    pub expected_length: f64,
    pub kraft: f64,
}

impl TypeClassFvCode {
    pub fn rate(&self) -> f64 {
        self.expected_length / self.n as f64
    }
}

/// Type-class counterpart of [`build_fv_code`].
pub fn build_fv_code_typeclass(
    table: &TypeClassTable,
    k: u32,
    delta: f64,
) -> Result<TypeClassFvCode> {
    check_coin(k)?;
    check_delta(delta)?;
    let pivot = table.pivot(delta);
    let classes = &table.classes()[..=pivot.pos];
    let pivot_kept = pivot.kept_full + classes[pivot.pos].prob();
    let kept_masses: Vec<f64> = classes[..pivot.pos]
        .iter()
        .map(|c| c.mass)
        .chain(std::iter::once(pivot_kept))
        .collect();
    let kept_mass = kahan_sum(kept_masses.iter().copied());
    let ln_kept_mass = kept_mass.ln();

    let mut expected = Vec::with_capacity(classes.len());
    let mut ln_kraft = Vec::with_capacity(classes.len());
    let mut ln_counts = Vec::with_capacity(classes.len());
    for (c, &m) in classes.iter().zip(&kept_masses) {
        let len = length_for(ln_kept_mass, c.ln_prob, k)?;
        expected.push(m * f64::from(len));
        let ln_count = (m.ln() - c.ln_prob).max(0.0);
        ln_counts.push(ln_count);
        ln_kraft.push(ln_count - f64::from(len) * f64::from(k).ln());
    }
    Ok(TypeClassFvCode {
        k,
        n: table.n(),
        log2_kept: log_sum_exp(ln_counts) / std::f64::consts::LN_2,
        error: pivot.tail_mass,
        expected_length: kahan_sum(expected),
        kraft: log_sum_exp(ln_kraft).exp(),
    })
}
