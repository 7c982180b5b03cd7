//! Variable-length resolvability codes and δ-error fixed-to-variable codes.
//!
//! A resolvability code draws a length `L` and then a uniformly random
//! `K`-ary string of that length, and maps the string deterministically to a
//! target sequence. Here every sequence `x` with `P_V(x) > 0` is assigned the
//! length `m(x) = ceil(log_K 1/P_V(x) + n gamma)`; `Pr[L = m]` is the target
//! mass of the length class `S(m)`, and the `K^m` strings of length `m` are
//! shared among the members of `S(m)` by largest-remainder apportionment.
//!
//! Codewords are kept as counts. [`VlCode::codebook`] materializes them for
//! small cases.

pub mod apportion;
pub mod fv;

pub use apportion::largest_remainder;
pub use fv::{build_fv_code, build_fv_code_typeclass, FvCode, TypeClassFvCode};

use crate::dist::{entropy, kahan_sum, mix, validate_weights, variational_distance, FiniteDist};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Snapping tolerance for `ceil` of logarithms that are integers up to rounding.
const CEIL_SNAP: f64 = 1e-12;

/// `log_K x`, exact for powers of two when `K = 2`.
pub(crate) fn log_k(x: f64, k: u32) -> f64 {
    if k == 2 {
        x.log2()
    } else {
        x.ln() / f64::from(k).ln()
    }
}

/// `ceil(v)`, treating values within rounding of an integer as that integer.
pub(crate) fn ceil_snapped(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= CEIL_SNAP * r.abs().max(1.0) {
        r
    } else {
        v.ceil()
    }
}

pub(crate) fn check_coin(k: u32) -> Result<()> {
    if k < 2 {
        Err(Error::InvalidCoinAlphabet(k))
    } else {
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

fn k_pow(k: u32, m: u32) -> Result<u128> {
    u128::from(k)
        .checked_pow(m)
        .ok_or(Error::LengthOverflow { m })
}

/// Partition of the target's support into length classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthPartition {
    /// `lengths[x]`: `m(x)`, or `None` for zero-probability atoms.
    pub lengths: Vec<Option<u32>>,
    /// `S(m)`: member indices in ascending order.
    pub classes: BTreeMap<u32, Vec<usize>>,
    /// `Pr[L = m]`.
    pub length_pmf: BTreeMap<u32, f64>,
}

/// Assigns `m(x) = ceil(log_K 1/P_V(x) + n gamma)` to each atom in the support.
pub fn partition_lengths(
    p_v: &FiniteDist,
    k: u32,
    n: usize,
    gamma: f64,
) -> Result<LengthPartition> {
    check_coin(k)?;
    check_gamma(gamma)?;
    let slack = n as f64 * gamma;
    let mut lengths = vec![None; p_v.len()];
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (x, &p) in p_v.probs().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let m = ceil_snapped(log_k(1.0 / p, k) + slack);
        if !(m >= 1.0 && m < f64::from(u32::MAX)) {
            return Err(Error::InvariantViolation(format!(
                "length {m} for atom {x} outside 1..2^32"
            )));
        }
        let m = m as u32;
        lengths[x] = Some(m);
        classes.entry(m).or_default().push(x);
    }
    let length_pmf = classes
        .iter()
        .map(|(&m, members)| (m, kahan_sum(members.iter().map(|&x| p_v.probs()[x]))))
        .collect();
    Ok(LengthPartition {
        lengths,
        classes,
        length_pmf,
    })
}

/// A variable-length resolvability code for one target distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VlCode {
    pub k: u32,
    pub n: usize,
    pub gamma: f64,
    pub partition: LengthPartition,
    /// For each length `m`: `(x, number of length-m strings mapped to x)`.
    pub apportionment: BTreeMap<u32, Vec<(usize, u128)>>,
    /// Distribution of the encoder output.
    pub induced: FiniteDist,
    /// `E[L]` in `K`-ary symbols.
    pub expected_length: f64,
    /// `d(P_V, P_induced)`.
    pub distance: f64,
    /// `H(P_V)` in base-`K` units.
    pub entropy_k: f64,
}

impl VlCode {
    pub fn length_pmf(&self) -> &BTreeMap<u32, f64> {
        &self.partition.length_pmf
    }

    /// `K^{-n gamma}`.
    fn coin_slack(&self) -> f64 {
        f64::from(self.k).powf(-(self.n as f64) * self.gamma)
    }

    /// `1/2 K^{-n gamma} + gamma`.
    pub fn distance_bound(&self) -> f64 {
        0.5 * self.coin_slack() + self.gamma
    }

    /// `(1 + K^{-n gamma}) (H_K(V) + n gamma + 1)`.
    pub fn length_bound(&self) -> f64 {
        (1.0 + self.coin_slack()) * (self.entropy_k + self.n as f64 * self.gamma + 1.0)
    }

    /// Every `K`-ary string of every occupied length, in lexicographic order
    /// within each length, with the target it is mapped to. Targets take
    /// consecutive blocks in ascending index order.
    pub fn codebook(&self) -> Result<Vec<Codeword>> {
        let strings: u128 = self.apportionment.values().flatten().map(|(_, c)| c).sum();
        if self.n > 8 || strings > 1 << 20 {
            return Err(Error::CodebookTooLarge);
        }
        let mut out = Vec::with_capacity(strings as usize);
        for (&m, shares) in &self.apportionment {
            let mut rank: u128 = 0;
            for &(x, count) in shares {
                for _ in 0..count {
                    out.push(Codeword {
                        symbols: k_ary_digits(rank, self.k, m),
                        target: x,
                    });
                    rank += 1;
                }
            }
        }
        Ok(out)
    }
}

/// One materialized codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub symbols: Vec<u8>,
    pub target: usize,
}

fn k_ary_digits(mut value: u128, k: u32, len: u32) -> Vec<u8> {
    let mut digits = vec![0u8; len as usize];
    for d in digits.iter_mut().rev() {
        *d = (value % u128::from(k)) as u8;
        value /= u128::from(k);
    }
    digits
}

/// Builds the resolvability code for `p_v` and checks both performance bounds.
pub fn build_vlcode(p_v: &FiniteDist, k: u32, n: usize, gamma: f64) -> Result<VlCode> {
    let partition = partition_lengths(p_v, k, n, gamma)?;
    let mut apportionment = BTreeMap::new();
    let mut induced = vec![0.0; p_v.len()];
    for (&m, members) in &partition.classes {
        let strings = k_pow(k, m)?;
        if (members.len() as u128) > strings {
            return Err(Error::InvariantViolation(format!(
                "length class {m} has {} members but only {strings} strings",
                members.len()
            )));
        }
        let class_mass = partition.length_pmf[&m];
        let quotas: Vec<f64> = members
            .iter()
            .map(|&x| strings as f64 * p_v.probs()[x] / class_mass)
            .collect();
        let shares = largest_remainder(&quotas, strings);
        for (&x, &s) in members.iter().zip(&shares) {
            induced[x] = class_mass * (s as f64 / strings as f64);
        }
        apportionment.insert(m, members.iter().copied().zip(shares).collect());
    }
    let induced = FiniteDist::from_raw(induced);
    let expected_length = kahan_sum(partition.length_pmf.iter().map(|(&m, &p)| f64::from(m) * p));
    let distance = variational_distance(p_v, &induced)?;
    let entropy_k = entropy(p_v, f64::from(k))?;

    let code = VlCode {
        k,
        n,
        gamma,
        partition,
        apportionment,
        induced,
        expected_length,
        distance,
        entropy_k,
    };
    if code.distance > code.distance_bound() + 1e-12 {
        return Err(Error::InvariantViolation(format!(
            "distance {} exceeds bound {}",
            code.distance,
            code.distance_bound()
        )));
    }
    if code.expected_length > code.length_bound() * (1.0 + 1e-12) {
        return Err(Error::InvariantViolation(format!(
            "expected length {} exceeds bound {}",
            code.expected_length,
            code.length_bound()
        )));
    }
    Ok(code)
}

/// One resolvability code per mixture component, with aggregate metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedVlCode {
    pub components: Vec<VlCode>,
    pub weights: Vec<f64>,
    /// `Pr[L = m] = sum_i alpha_i Pr[L_i = m]`.
    pub length_pmf: BTreeMap<u32, f64>,
    /// `sum_i alpha_i E[L_i]`.
    pub expected_length: f64,
    /// `sum_i alpha_i d(P_{V_i}, P_{induced_i})`.
    pub distance: f64,
    /// `d(sum_i alpha_i P_{V_i}, sum_i alpha_i P_{induced_i})`; never above `distance`.
    pub mixture_distance: f64,
}

pub fn build_mixed_vlcode(
    targets: &[FiniteDist],
    weights: &[f64],
    k: u32,
    n: usize,
    gamma: f64,
) -> Result<MixedVlCode> {
    if targets.is_empty() {
        return Err(Error::EmptySource);
    }
    let weights = validate_weights(weights, targets.len())?;
    if let Some(t) = targets.iter().find(|t| t.len() != targets[0].len()) {
        return Err(Error::DimensionMismatch {
            left: targets[0].len(),
            right: t.len(),
        });
    }
    let components = targets
        .iter()
        .map(|t| build_vlcode(t, k, n, gamma))
        .collect::<Result<Vec<_>>>()?;

    let mut length_pmf: BTreeMap<u32, f64> = BTreeMap::new();
    for (c, &w) in components.iter().zip(&weights) {
        for (&m, &p) in c.length_pmf() {
            *length_pmf.entry(m).or_default() += w * p;
        }
    }
    let expected_length = kahan_sum(
        components
            .iter()
            .zip(&weights)
            .map(|(c, w)| w * c.expected_length),
    );
    let distance = kahan_sum(components.iter().zip(&weights).map(|(c, w)| w * c.distance));
    let target_mix = mix(targets, &weights)?;
    let induced: Vec<FiniteDist> = components.iter().map(|c| c.induced.clone()).collect();
    let induced_mix = mix(&induced, &weights)?;
    let mixture_distance = variational_distance(&target_mix, &induced_mix)?;

    Ok(MixedVlCode {
        components,
        weights,
        length_pmf,
        expected_length,
        distance,
        mixture_distance,
    })
}
