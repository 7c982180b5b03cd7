//! Closed-form first- and second-order rates for mixtures of i.i.d. sources.
//!
//! Components are ranked by descending single-letter entropy. The pivot
//! component `i*` is the first whose cumulative weight `A_{i*}` exceeds
//! `delta`; components ranked before it are given up entirely, the pivot
//! partially (fraction `delta_{i*}`), the rest not at all.
//!
//! All rates are in bits; [`to_k_ary`] converts to base-`K` units.
//! Finite alphabets give every component a finite third absolute moment, so
//! the dispersion term needs no further assumption beyond a strict entropy
//! order.

pub mod gaussian;

pub use gaussian::{gaussian_density, q_function, q_inverse};

use crate::dist::{kahan_sum, validate_weights, FiniteDist, MixedSourceSpec};
use crate::error::{Error, Result};
use crate::smooth::check_delta;
use crate::smooth::dagger::{entropy_order, pivot_component};
use std::f64::consts::PI;

/// Entropies closer than this are treated as tied.
pub const ENTROPY_TIE_TOLERANCE: f64 = 1e-12;

/// Variance of the self-information `log2 1/p(X)`, in bits squared.
pub fn varentropy(p: &FiniteDist) -> f64 {
    let h = p.entropy_bits();
    let v = kahan_sum(p.probs().iter().filter(|&&q| q > 0.0).map(|&q| {
        let dev = -q.log2() - h;
        q * dev * dev
    }));
    v.max(0.0)
}

/// Single-letter statistics of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentStats {
    /// `H(X_i)` in bits.
    pub entropy: f64,
    /// `V(X_i)` in bits squared.
    pub varentropy: f64,
}

/// Rate summary for one mixture and one `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub delta: f64,
    /// Components by descending entropy; `order[rank]` is an original index.
    pub order: Vec<usize>,
    /// Original index of the pivot component.
    pub i_star: usize,
    /// `A_{i*}`: cumulative weight up to and including the pivot.
    pub a_istar: f64,
    /// Fraction of the pivot component given up, in `[0, 1)`.
    pub delta_istar: f64,
    /// Bits per symbol.
    pub first_order: f64,
    /// Bits per square-root symbol; `None` when only the first order was asked for.
    pub second_order: Option<f64>,
    /// Original component order.
    pub per_component: Vec<ComponentStats>,
}

/// Pivot quantities shared by both orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Pivot {
    pub order: Vec<usize>,
    pub i_star: usize,
    pub a_istar: f64,
    pub delta_istar: f64,
}

/// Locates `i*`, `A_{i*}` and `delta_{i*}` for the given entropies and weights.
pub fn pivot_from_parts(entropies: &[f64], weights: &[f64], delta: f64) -> Result<Pivot> {
    if entropies.is_empty() {
        return Err(Error::EmptySource);
    }
    let weights = validate_weights(weights, entropies.len())?;
    check_delta(delta)?;
    let order = entropy_order(entropies);
    let (rank, before) = pivot_component(&order, &weights, delta);
    let i_star = order[rank];
    let alpha = weights[i_star];
    Ok(Pivot {
        i_star,
        a_istar: before + alpha,
        delta_istar: ((delta - before) / alpha).clamp(0.0, 1.0),
        order,
    })
}

/// `(A_{i*} - delta) H_{i*} + sum_{i after i*} alpha_i H_i`.
pub fn first_order_from_parts(entropies: &[f64], weights: &[f64], delta: f64) -> Result<f64> {
    let pivot = pivot_from_parts(entropies, weights, delta)?;
    let rank = pivot
        .order
        .iter()
        .position(|&i| i == pivot.i_star)
        .unwrap_or(0);
    let head = (pivot.a_istar - delta).max(0.0) * entropies[pivot.i_star];
    let rest = pivot.order[rank + 1..]
        .iter()
        .map(|&i| weights[i] * entropies[i]);
    Ok(kahan_sum(std::iter::once(head).chain(rest)).max(0.0))
}

fn check_strict_order(entropies: &[f64], order: &[usize]) -> Result<()> {
    for pair in order.windows(2) {
        if (entropies[pair[0]] - entropies[pair[1]]).abs() <= ENTROPY_TIE_TOLERANCE {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            return Err(Error::EntropyTie(a, b));
        }
    }
    Ok(())
}

/// `-alpha_{i*} sqrt(V_{i*} / 2 pi) exp(-Q^{-1}(delta_{i*})^2 / 2)`, zero when `delta_{i*} = 0`.
pub fn second_order_from_parts(
    entropies: &[f64],
    varentropies: &[f64],
    weights: &[f64],
    delta: f64,
) -> Result<f64> {
    if varentropies.len() != entropies.len() {
        return Err(Error::DimensionMismatch {
            left: entropies.len(),
            right: varentropies.len(),
        });
    }
    let pivot = pivot_from_parts(entropies, weights, delta)?;
    check_strict_order(entropies, &pivot.order)?;
    dispersion_term(
        weights[pivot.i_star],
        varentropies[pivot.i_star],
        pivot.delta_istar,
    )
}

fn dispersion_term(alpha: f64, v: f64, d: f64) -> Result<f64> {
    if d <= 0.0 || v <= 0.0 {
        return Ok(0.0);
    }
    let y = q_inverse(d)?;
    Ok(-alpha * (v / (2.0 * PI)).sqrt() * (-0.5 * y * y).exp())
}

fn component_stats(spec: &MixedSourceSpec) -> Result<Vec<ComponentStats>> {
    Ok(spec
        .iid_letters()?
        .iter()
        .map(|s| ComponentStats {
            entropy: s.single_letter.entropy_bits(),
            varentropy: varentropy(&s.single_letter),
        })
        .collect())
}

fn report(spec: &MixedSourceSpec, delta: f64, with_second: bool) -> Result<RateReport> {
    let stats = component_stats(spec)?;
    let entropies: Vec<f64> = stats.iter().map(|s| s.entropy).collect();
    let weights = spec.weights();
    let pivot = pivot_from_parts(&entropies, weights, delta)?;
    let first_order = first_order_from_parts(&entropies, weights, delta)?;
    let second_order = if with_second {
        check_strict_order(&entropies, &pivot.order)?;
        Some(dispersion_term(
            weights[pivot.i_star],
            stats[pivot.i_star].varentropy,
            pivot.delta_istar,
        )?)
    } else {
        None
    };
    Ok(RateReport {
        delta,
        order: pivot.order,
        i_star: pivot.i_star,
        a_istar: pivot.a_istar,
        delta_istar: pivot.delta_istar,
        first_order,
        second_order,
        per_component: stats,
    })
}

/// First-order rate of a mixture of i.i.d. components; entropy ties are allowed.
pub fn first_order_rate(spec: &MixedSourceSpec, delta: f64) -> Result<RateReport> {
    report(spec, delta, false)
}

/// First- and second-order rates; components must have pairwise distinct entropies.
pub fn second_order_rate(spec: &MixedSourceSpec, delta: f64) -> Result<RateReport> {
    report(spec, delta, true)
}

/// Two-term expansion `(1 - delta) n H - sqrt(n V / 2 pi) exp(-Q^{-1}(delta)^2 / 2)`
/// of `H_[delta](X^n)` in bits, for `delta` in `(0, 1)`.
pub fn kpv_estimate(p: &FiniteDist, n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroBlocklength);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let n = n as f64;
    let y = q_inverse(delta)?;
    let v = varentropy(p);
    Ok((1.0 - delta) * n * p.entropy_bits() - (n * v / (2.0 * PI)).sqrt() * (-0.5 * y * y).exp())
}

/// Converts a bit-valued rate (first or second order) into base-`K` units.
pub fn to_k_ary(bits: f64, k: u32) -> Result<f64> {
    crate::code::check_coin(k)?;
    Ok(bits / f64::from(k).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(p0: f64) -> FiniteDist {
        FiniteDist::binary(p0).unwrap()
    }

    /// Five letters with entropy 2 bits and varentropy 1 bit squared.
    fn unit_varentropy() -> FiniteDist {
        FiniteDist::new(vec![0.5, 0.125, 0.125, 0.125, 0.125]).unwrap()
    }

    #[test]
    fn varentropy_examples() {
        assert_eq!(varentropy(&FiniteDist::uniform(8).unwrap()), 0.0);
        assert_eq!(varentropy(&bern(0.5)), 0.0);
        let want = 0.1875 * 3f64.log2().powi(2);
        assert!((varentropy(&bern(0.25)) - want).abs() < 1e-12);
        assert!((want - 0.471020).abs() < 1e-6);
        assert!((varentropy(&unit_varentropy()) - 1.0).abs() < 1e-15);
        assert!((unit_varentropy().entropy_bits() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn first_order_examples() {
        assert!(
            (first_order_from_parts(&[1.0, 0.5], &[0.3, 0.7], 0.1).unwrap() - 0.55).abs() < 1e-15
        );
        assert!(
            (first_order_from_parts(&[1.0, 0.5], &[0.3, 0.7], 0.4).unwrap() - 0.3).abs() < 1e-15
        );
        assert!(
            (first_order_from_parts(&[0.5, 1.0], &[0.7, 0.3], 0.0).unwrap() - 0.65).abs() < 1e-15
        );
        let p = bern(0.3);
        let spec = MixedSourceSpec::iid(vec![p.clone()], vec![1.0], 10).unwrap();
        let r = first_order_rate(&spec, 0.1).unwrap();
        assert!((r.first_order - 0.9 * p.entropy_bits()).abs() < 1e-15);
        assert!((r.first_order - 0.793162).abs() < 1e-6);
        assert_eq!(r.second_order, None);
    }

    #[test]
    fn pivot_is_right_continuous() {
        let p = pivot_from_parts(&[1.0, 0.5], &[0.3, 0.7], 0.3).unwrap();
        assert_eq!(p.i_star, 1);
        assert_eq!(p.delta_istar, 0.0);
        let p = pivot_from_parts(&[1.0, 0.5], &[0.3, 0.7], 0.1).unwrap();
        assert_eq!(p.i_star, 0);
        assert!((p.a_istar - 0.3).abs() < 1e-15);
        assert!((p.delta_istar - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn second_order_examples() {
        let spec = MixedSourceSpec::iid(
            vec![
                unit_varentropy(),
                FiniteDist::new(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(),
            ],
            vec![0.5, 0.5],
            4,
        )
        .unwrap();
        let r = second_order_rate(&spec, 0.25).unwrap();
        assert_eq!(r.i_star, 0);
        assert!((r.delta_istar - 0.5).abs() < 1e-15);
        let want = -0.5 / (2.0 * PI).sqrt();
        assert!((r.second_order.unwrap() - want).abs() < 1e-12);
        assert!((want + 0.199471).abs() < 1e-6);

        let uniform =
            MixedSourceSpec::iid(vec![FiniteDist::uniform(4).unwrap()], vec![1.0], 3).unwrap();
        assert_eq!(
            second_order_rate(&uniform, 0.3).unwrap().second_order,
            Some(0.0)
        );
        let single = MixedSourceSpec::iid(vec![bern(0.3)], vec![1.0], 3).unwrap();
        assert_eq!(
            second_order_rate(&single, 0.0).unwrap().second_order,
            Some(0.0)
        );
    }

    #[test]
    fn second_order_rejects_ties() {
        let spec = MixedSourceSpec::iid(vec![bern(0.3), bern(0.7)], vec![0.5, 0.5], 2).unwrap();
        assert!(matches!(
            second_order_rate(&spec, 0.2),
            Err(Error::EntropyTie(0, 1))
        ));
        assert!(first_order_rate(&spec, 0.2).is_ok());
    }

    #[test]
    fn kpv_examples() {
        let fair = bern(0.5);
        assert!((kpv_estimate(&fair, 1000, 0.2).unwrap() - 800.0).abs() < 1e-9);
        let p = bern(0.3);
        let n = 400;
        let est = kpv_estimate(&p, n, 0.5).unwrap();
        let want =
            0.5 * n as f64 * p.entropy_bits() - (n as f64 * varentropy(&p) / (2.0 * PI)).sqrt();
        assert!((est - want).abs() < 1e-9);
        assert!(matches!(
            kpv_estimate(&p, n, 0.0),
            Err(Error::InvalidDelta(_))
        ));
    }

    #[test]
    fn k_ary_conversion() {
        assert_eq!(to_k_ary(3.0, 2).unwrap(), 3.0);
        assert!((to_k_ary(3f64.log2(), 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(to_k_ary(1.0, 1).is_err());
    }
}
