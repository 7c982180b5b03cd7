//! The per-component ("dagger") problem: each mixture component is smoothed
//! separately and only the weighted average of component distances must stay
//! within `delta`.
//!
//! In the i.i.d. limit each `H_[d](X_i^n) / n` becomes `(1 - d) H(X_i)` and the
//! allocation of the budget across components is a linear program whose
//! optimum spends budget on the highest-entropy components first
//! ([`dagger_allocation`]). At finite `n` that shape is not guaranteed, so a
//! brute-force grid over allocations ([`dagger_grid_min`]) is kept as an
//! independent oracle.

use super::{check_delta, pivot_rank, tail_masses, SmoothEntropyCurve};
use crate::dist::{
    kahan_sum, mix, validate_weights, variational_distance, FiniteDist, MixedSourceSpec,
};
use crate::error::{Error, Result};

/// Optimal budget split in the i.i.d. limit.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Per-component budget `delta_i`, original component order.
    pub deltas: Vec<f64>,
    /// `sum_i alpha_i (1 - delta_i) H_i`, in the units of the input entropies.
    pub objective: f64,
    /// Original index of the pivot component `i*`.
    pub active_index: usize,
    /// Components by descending entropy (stable on ties); `order[rank]` is an original index.
    pub order: Vec<usize>,
}

/// Stable descending-entropy order.
pub(crate) fn entropy_order(entropies: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..entropies.len()).collect();
    order.sort_by(|&a, &b| entropies[b].total_cmp(&entropies[a]));
    order
}

/// Rank (into `order`) of the first component whose cumulative weight
/// exceeds `delta`, and the cumulative weight strictly before it.
pub(crate) fn pivot_component(order: &[usize], weights: &[f64], delta: f64) -> (usize, f64) {
    let mut before = 0.0;
    let mut last_positive = 0;
    for (rank, &i) in order.iter().enumerate() {
        if weights[i] > 0.0 {
            last_positive = rank;
        }
        if before + weights[i] > delta {
            return (rank, before);
        }
        before += weights[i];
    }
    // Only reachable when rounding pushed the total weight below delta.
    let before = order[..last_positive].iter().map(|&i| weights[i]).sum();
    (last_positive, before)
}

fn check_entropies(entropies: &[f64]) -> Result<()> {
    if entropies.is_empty() {
        return Err(Error::EmptySource);
    }
    if let Some(h) = entropies.iter().find(|h| !h.is_finite() || **h < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "entropy {h} is negative or not finite"
        )));
    }
    Ok(())
}

/// Greedy solution of the allocation linear program.
pub fn dagger_allocation(
    entropies: &[f64],
    weights: &[f64],
    delta: f64,
) -> Result<AllocationResult> {
    check_entropies(entropies)?;
    let weights = validate_weights(weights, entropies.len())?;
    check_delta(delta)?;
    let order = entropy_order(entropies);
    let (pivot, before) = pivot_component(&order, &weights, delta);
    let mut deltas = vec![0.0; entropies.len()];
    for (rank, &i) in order.iter().enumerate() {
        deltas[i] = match rank.cmp(&pivot) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => ((delta - before) / weights[i]).clamp(0.0, 1.0),
            std::cmp::Ordering::Greater => 0.0,
        };
    }
    let objective =
        kahan_sum((0..entropies.len()).map(|i| weights[i] * (1.0 - deltas[i]) * entropies[i]));
    Ok(AllocationResult {
        deltas,
        objective,
        active_index: order[pivot],
        order,
    })
}

/// Best allocation found on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub value: f64,
    pub deltas: Vec<f64>,
}

/// Minimizes `sum_i alpha_i cost(i, delta_i)` over `{delta_i >= 0 : sum alpha_i delta_i = delta}`.
///
/// For every choice of "remainder" component `r` with `alpha_r > 0`, the other
/// budgets range over `{0, step, 2 step, ..., 1}` and `delta_r` absorbs what is
/// left (it may exceed one). Supports at most three components.
pub fn dagger_grid_min<F>(
    weights: &[f64],
    delta: f64,
    step: f64,
    mut cost: F,
) -> Result<GridMinimum>
where
    F: FnMut(usize, f64) -> f64,
{
    let k = weights.len();
    if k == 0 {
        return Err(Error::EmptySource);
    }
    if k > 3 {
        return Err(Error::TooManyComponents(k));
    }
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidGridStep(step));
    }
    let weights = validate_weights(weights, k)?;
    check_delta(delta)?;

    let points = (1.0 / step).round() as usize;
    let grid: Vec<f64> = (0..=points).map(|g| (g as f64 * step).min(1.0)).collect();
    let grid = {
        let mut g = grid;
        if *g.last().unwrap() < 1.0 {
            g.push(1.0);
        }
        g
    };
    // Zero-weight components never move the constraint; pin them at 0.
    let tables: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            if weights[i] > 0.0 {
                grid.iter().map(|&d| cost(i, d)).collect()
            } else {
                vec![cost(i, 0.0)]
            }
        })
        .collect();
    let axis = |i: usize| -> &[f64] {
        if weights[i] > 0.0 {
            &grid
        } else {
            &grid[..1]
        }
    };

    let mut best = GridMinimum {
        value: f64::INFINITY,
        deltas: vec![0.0; k],
    };
    for r in (0..k).filter(|&r| weights[r] > 0.0) {
        let free: Vec<usize> = (0..k).filter(|&i| i != r).collect();
        let sizes: Vec<usize> = free.iter().map(|&i| axis(i).len()).collect();
        let total: usize = sizes.iter().product();
        let mut idx = vec![0usize; free.len()];
        for flat in 0..total {
            let mut rem = flat;
            for (slot, size) in idx.iter_mut().zip(&sizes) {
                *slot = rem % size;
                rem /= size;
            }
            let used: f64 = free
                .iter()
                .zip(&idx)
                .map(|(&i, &g)| weights[i] * axis(i)[g])
                .sum();
            let left = (delta - used) / weights[r];
            if left < -1e-12 {
                continue;
            }
            let left = left.max(0.0);
            let mut value = weights[r] * cost(r, left);
            for (&i, &g) in free.iter().zip(&idx) {
                value += weights[i] * tables[i][g];
            }
            if value < best.value {
                best.value = value;
                best.deltas = vec![0.0; k];
                best.deltas[r] = left;
                for (&i, &g) in free.iter().zip(&idx) {
                    best.deltas[i] = axis(i)[g];
                }
            }
        }
    }
    Ok(best)
}

/// Grid estimate (from above) of `inf sum_i alpha_i H_[delta_i](component_i)`, bits.
pub fn dagger_smooth_entropy_finite(
    components: &[FiniteDist],
    weights: &[f64],
    delta: f64,
    grid_step: f64,
) -> Result<f64> {
    if components.len() > 3 {
        return Err(Error::TooManyComponents(components.len()));
    }
    if let Some(c) = components.iter().find(|c| c.len() != components[0].len()) {
        return Err(Error::DimensionMismatch {
            left: components[0].len(),
            right: c.len(),
        });
    }
    let curves: Vec<SmoothEntropyCurve> = components.iter().map(SmoothEntropyCurve::new).collect();
    dagger_grid_min(weights, delta, grid_step, |i, d| curves[i].eval(d)).map(|m| m.value)
}

/// Common-pivot truncation of every mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTruncation {
    /// `V_i`: component `i` kept on ranks before `j*`, its remaining mass `eta_i` piled on `j*`.
    pub components: Vec<FiniteDist>,
    /// `V`: the same truncation applied to the mixture.
    pub mixture_truncation: FiniteDist,
    /// 1-based pivot rank in the mixture's sorted order.
    pub j_star: usize,
    pub etas: Vec<f64>,
    pub sort_perm: Vec<usize>,
    /// Mixture mass ranked after `j*`; at most `delta`.
    pub tail_mass: f64,
}

impl ComponentTruncation {
    /// `sum_i alpha_i d(P_i, V_i)` for the original components.
    pub fn average_distance(&self, originals: &[FiniteDist], weights: &[f64]) -> Result<f64> {
        let mut acc = Vec::with_capacity(originals.len());
        for ((p, v), w) in originals.iter().zip(&self.components).zip(weights) {
            acc.push(w * variational_distance(p, v)?);
        }
        Ok(kahan_sum(acc))
    }
}

fn truncate(probs: &[f64], sort_perm: &[usize], js: usize) -> (FiniteDist, f64) {
    let mut v = vec![0.0; probs.len()];
    for &idx in &sort_perm[..js] {
        v[idx] = probs[idx];
    }
    let eta = kahan_sum(sort_perm[js..].iter().map(|&i| probs[i]));
    v[sort_perm[js]] = eta;
    (FiniteDist::from_raw(v), eta)
}

/// Truncates every component at the mixture's pivot rank, so that the
/// weighted sum of the truncated components equals the truncated mixture.
pub fn component_truncation(spec: &MixedSourceSpec, delta: f64) -> Result<ComponentTruncation> {
    check_delta(delta)?;
    let components = spec.materialize_components()?;
    let mixed = mix(&components, spec.weights())?;
    let sort_perm = mixed.descending_order();
    let sorted: Vec<f64> = sort_perm.iter().map(|&i| mixed.probs()[i]).collect();
    let tails = tail_masses(&sorted);
    let js = pivot_rank(&tails, delta);

    let (mixture_truncation, _) = truncate(mixed.probs(), &sort_perm, js);
    let (truncated, etas): (Vec<_>, Vec<_>) = components
        .iter()
        .map(|c| truncate(c.probs(), &sort_perm, js))
        .unzip();
    Ok(ComponentTruncation {
        components: truncated,
        mixture_truncation,
        j_star: js + 1,
        etas,
        sort_perm,
        tail_mass: tails[js],
    })
}

/// Achievability witnesses for the greedy allocation on explicit components.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationWitness {
    pub allocation: AllocationResult,
    /// Components before the pivot become a point mass on `anchor`; the pivot
    /// component is mixed with it at rate `delta_i*`; the rest stay as they are.
    pub components: Vec<FiniteDist>,
    pub anchor: usize,
}

/// Builds distributions meeting the greedy allocation's per-component budgets,
/// ordering components by the entropy of the given distributions.
pub fn allocation_witness(
    components: &[FiniteDist],
    weights: &[f64],
    delta: f64,
    anchor: usize,
) -> Result<AllocationWitness> {
    let size = components.first().ok_or(Error::EmptySource)?.len();
    if anchor >= size {
        return Err(Error::DimensionMismatch {
            left: anchor + 1,
            right: size,
        });
    }
    let entropies: Vec<f64> = components.iter().map(FiniteDist::entropy_bits).collect();
    let allocation = dagger_allocation(&entropies, weights, delta)?;
    let witnesses = components
        .iter()
        .zip(&allocation.deltas)
        .map(|(p, &di)| {
            if p.len() != size {
                return Err(Error::DimensionMismatch {
                    left: size,
                    right: p.len(),
                });
            }
            let mut v: Vec<f64> = p.probs().iter().map(|&x| (1.0 - di) * x).collect();
            v[anchor] += di;
            Ok(FiniteDist::from_raw(v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AllocationWitness {
        allocation,
        components: witnesses,
        anchor,
    })
}
