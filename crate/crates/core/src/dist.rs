//! Finite probability distributions and the handful of exact operations the
//! rest of the crate is built on: variational distance, entropy, mixtures,
//! i.i.d. product extension and memoryless channel outputs.
//!
//! All arithmetic is plain `f64`; explicit vectors here stay short. Long
//! i.i.d. blocks go through [`crate::smooth::TypeClassTable`] instead.
//!
//! Only finite supports are represented. A source on a countably infinite
//! alphabet has to be truncated by the caller first.

use crate::error::{Error, Result};

/// Largest explicit product alphabet [`product_extension`] will materialize.
pub const MAX_EXPLICIT_ATOMS: usize = 1 << 24;

/// Tolerance on `|sum - 1|` under which inputs are renormalized instead of rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A probability vector over the alphabet `0..len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    probs: Vec<f64>,
}

impl FiniteDist {
    /// Validates and, if the sum is within [`NORMALIZATION_TOLERANCE`] of one,
    /// renormalizes `probs`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        let probs = if sum == 1.0 {
            probs
        } else {
            probs.into_iter().map(|p| p / sum).collect()
        };
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    /// Two-letter distribution `(p0, 1 - p0)`; `p0` is the mass on symbol 0.
    pub fn binary(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidProbability {
                index: 0,
                value: p0,
            });
        }
        Ok(Self {
            probs: vec![p0, 1.0 - p0],
        })
    }

    /// Point mass on `index`.
    pub fn point(size: usize, index: usize) -> Result<Self> {
        if index >= size {
            return Err(Error::DimensionMismatch {
                left: index + 1,
                right: size,
            });
        }
        let mut probs = vec![0.0; size];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        entropy_with_ln_base(&self.probs, std::f64::consts::LN_2)
    }

    /// Atom indices sorted by descending probability, ties by ascending index.
    pub fn descending_order(&self) -> Vec<usize> {
        descending_order(&self.probs)
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Support size (number of strictly positive atoms).
    pub fn support_len(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Wraps a vector already known to be a distribution up to rounding.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!(!probs.is_empty());
        Self { probs }
    }
}

/// Indices of `probs` sorted by descending value; stable, so ties keep ascending index.
pub(crate) fn descending_order(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    order
}

/// An i.i.d. block source: `single_letter` repeated `n` times.
#[derive(Debug, Clone, PartialEq)]
pub struct IidSpec {
    pub single_letter: FiniteDist,
    pub n: usize,
}

impl IidSpec {
    pub fn new(single_letter: FiniteDist, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroBlocklength);
        }
        Ok(Self { single_letter, n })
    }

    /// `|X|^n`, or `None` when it does not fit in a `usize`.
    pub fn block_alphabet_size(&self) -> Option<usize> {
        u32::try_from(self.n)
            .ok()
            .and_then(|n| self.single_letter.len().checked_pow(n))
    }
}

/// One component of a mixed source.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentSpec {
    Explicit(FiniteDist),
    Iid(IidSpec),
}

impl ComponentSpec {
    /// Alphabet size of the materialized component, if representable.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            ComponentSpec::Explicit(p) => Some(p.len()),
            ComponentSpec::Iid(spec) => spec.block_alphabet_size(),
        }
    }

    pub fn materialize(&self) -> Result<FiniteDist> {
        match self {
            ComponentSpec::Explicit(p) => Ok(p.clone()),
            ComponentSpec::Iid(spec) => product_extension(spec),
        }
    }
}

/// A finite mixture `sum_i alpha_i P_i` of components over one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSourceSpec {
    components: Vec<ComponentSpec>,
    weights: Vec<f64>,
}

impl MixedSourceSpec {
    pub fn new(components: Vec<ComponentSpec>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptySource);
        }
        let weights = validate_weights(&weights, components.len())?;
        let first = components[0].alphabet_size();
        for c in &components[1..] {
            let size = c.alphabet_size();
            if size != first {
                return Err(Error::DimensionMismatch {
                    left: first.unwrap_or(usize::MAX),
                    right: size.unwrap_or(usize::MAX),
                });
            }
        }
        Ok(Self {
            components,
            weights,
        })
    }

    /// Convenience constructor for a mixture of i.i.d. components sharing `n`.
    pub fn iid(letters: Vec<FiniteDist>, weights: Vec<f64>, n: usize) -> Result<Self> {
        let components = letters
            .into_iter()
            .map(|p| IidSpec::new(p, n).map(ComponentSpec::Iid))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components, weights)
    }

    pub fn explicit(components: Vec<FiniteDist>, weights: Vec<f64>) -> Result<Self> {
        Self::new(
            components
                .into_iter()
                .map(ComponentSpec::Explicit)
                .collect(),
            weights,
        )
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-letter distributions, failing on the first non-i.i.d. component.
    pub fn iid_letters(&self) -> Result<Vec<&IidSpec>> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                ComponentSpec::Iid(spec) => Ok(spec),
                ComponentSpec::Explicit(_) => Err(Error::NotIid(i)),
            })
            .collect()
    }

    /// Every component materialized as an explicit distribution.
    pub fn materialize_components(&self) -> Result<Vec<FiniteDist>> {
        self.components
            .iter()
            .map(ComponentSpec::materialize)
            .collect()
    }
}

/// Checks `alpha_i >= 0` summing to one (renormalizing within 1e-9).
pub(crate) fn validate_weights(weights: &[f64], expected: usize) -> Result<Vec<f64>> {
    if weights.len() != expected {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} components",
            weights.len(),
            expected
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let sum = kahan_sum(weights.iter().copied());
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
    }
    Ok(weights.iter().map(|w| w / sum).collect())
}

/// A memoryless channel given by its row-stochastic matrix `W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    rows: Vec<FiniteDist>,
}

impl Dmc {
    pub fn new(rows: Vec<FiniteDist>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::EmptyDistribution);
        };
        let width = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                left: width,
                right: bad.len(),
            });
        }
        Ok(Self { rows })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|i| FiniteDist::point(size, i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &FiniteDist {
        &self.rows[x]
    }
}

/// Half the L1 distance between `p` and `q`.
pub fn variational_distance(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let l1 = kahan_sum(p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()));
    Ok((0.5 * l1).min(1.0))
}

/// Shannon entropy of `p` in units of `log_base`, with `0 log(1/0) = 0`.
pub fn entropy(p: &FiniteDist, base: f64) -> Result<f64> {
    if !base.is_finite() || base <= 1.0 {
        return Err(Error::InvalidBase(base));
    }
    Ok(entropy_with_ln_base(&p.probs, base.ln()))
}

pub(crate) fn entropy_with_ln_base(probs: &[f64], ln_base: f64) -> f64 {
    let nats = kahan_sum(probs.iter().map(|&p| self_information_term(p)));
    (nats / ln_base).max(0.0)
}

/// `p ln(1/p)` with the `0 ln(1/0) = 0` convention.
#[inline]
pub(crate) fn self_information_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// `sum_i alpha_i P_i`, materializing i.i.d. components first.
pub fn mixture(spec: &MixedSourceSpec) -> Result<FiniteDist> {
    let components = spec.materialize_components()?;
    mix(&components, spec.weights())
}

pub(crate) fn mix(components: &[FiniteDist], weights: &[f64]) -> Result<FiniteDist> {
    let size = components[0].len();
    let mut out = vec![0.0; size];
    for (c, &w) in components.iter().zip(weights) {
        if c.len() != size {
            return Err(Error::DimensionMismatch {
                left: size,
                right: c.len(),
            });
        }
        for (o, &p) in out.iter_mut().zip(c.probs()) {
            *o += w * p;
        }
    }
    Ok(FiniteDist::from_raw(out))
}

/// The explicit product distribution of `spec.n` i.i.d. letters in
/// lexicographic order (first letter most significant).
pub fn product_extension(spec: &IidSpec) -> Result<FiniteDist> {
    let letters = spec.single_letter.probs();
    let size = spec
        .block_alphabet_size()
        .filter(|&s| s <= MAX_EXPLICIT_ATOMS)
        .ok_or(Error::ProductTooLarge {
            alphabet: letters.len(),
            n: spec.n,
        })?;
    let mut probs = Vec::with_capacity(size);
    probs.push(1.0);
    for _ in 0..spec.n {
        probs = probs
            .iter()
            .flat_map(|&prefix| letters.iter().map(move |&p| prefix * p))
            .collect();
    }
    Ok(FiniteDist::from_raw(probs))
}

/// Output distribution `q(y) = sum_x p(x) W(y|x)`.
pub fn dmc_output(p: &FiniteDist, w: &Dmc) -> Result<FiniteDist> {
    if p.len() != w.input_size() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: w.input_size(),
        });
    }
    let mut out = vec![0.0; w.output_size()];
    for (x, &px) in p.probs().iter().enumerate() {
        for (o, &wyx) in out.iter_mut().zip(w.row(x).probs()) {
            *o += px * wyx;
        }
    }
    Ok(FiniteDist::from_raw(out))
}

/// Neumaier-compensated summation.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
