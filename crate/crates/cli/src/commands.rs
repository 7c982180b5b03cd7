//! The five subcommands. Each returns a [`Table`] with a fixed schema per
//! command and source kind (see the README).

use crate::config::{ExperimentSpec, Source};
use crate::failure::Failure;
use crate::output::{Cell, Table};
use rayon::prelude::*;
use resolv::code::{build_fv_code, build_fv_code_typeclass, build_mixed_vlcode, build_vlcode};
use resolv::dist::{mixture, product_extension};
use resolv::rates::second_order_rate;
use resolv::smooth::dagger_smooth_entropy_finite;
use resolv::{
    first_order_rate, smooth_entropy, smooth_min_entropy_dist, FiniteDist, IidSpec,
    MixedSourceSpec, RateReport, TypeClassTable,
};
use serde_json::{json, Value};

type Outcome = Result<Table, Failure>;

/// Runs `per_n` for every blocklength, concurrently, keeping the input order.
fn sweep(ns: &[usize], per_n: impl Fn(usize) -> Outcome + Sync) -> Outcome {
    let tables: Vec<Table> = ns.par_iter().map(|&n| per_n(n)).collect::<Result<_, _>>()?;
    let mut iter = tables.into_iter();
    let mut first = iter
        .next()
        .ok_or_else(|| Failure::spec("no blocklengths to evaluate"))?;
    for t in iter {
        first.append(t);
    }
    Ok(first)
}

fn is_binary(letters: &[FiniteDist]) -> bool {
    letters.iter().all(|l| l.len() == 2)
}

fn iid_spec(letters: &[FiniteDist], weights: &[f64], n: usize) -> Result<MixedSourceSpec, Failure> {
    Ok(MixedSourceSpec::iid(letters.to_vec(), weights.to_vec(), n)?)
}

fn single_or_mixed(source: &Source) -> Option<(Vec<FiniteDist>, Vec<f64>)> {
    match source {
        Source::Explicit(_) => None,
        Source::Iid(l) => Some((vec![l.clone()], vec![1.0])),
        Source::Mixed { letters, weights } => Some((letters.clone(), weights.clone())),
    }
}

fn require_blocklengths(spec: &ExperimentSpec, what: &str) -> Result<Vec<usize>, Failure> {
    spec.blocklengths()
        .ok_or_else(|| Failure::spec(format!("{what} needs --n or --n-sweep")))
}

/// Blocklength label of an explicit source; sweeps make no sense there.
fn explicit_n(spec: &ExperimentSpec) -> Result<usize, Failure> {
    if spec.n_sweep.is_some() {
        return Err(Failure::spec(
            "--n-sweep needs an i.i.d. or mixed i.i.d. source",
        ));
    }
    Ok(spec.n.unwrap_or(1))
}

const SMOOTH_EXPLICIT: &[&str] = &[
    "n",
    "delta",
    "h_delta",
    "h_delta_per_n",
    "j_star",
    "epsilon",
];
const SMOOTH_TYPECLASS: &[&str] = &[
    "n",
    "delta",
    "h_delta",
    "h_delta_per_n",
    "log2_j_star",
    "pivot_ones",
    "epsilon",
    "rate_first",
];
const SMOOTH_MIXED_EXPLICIT: &[&str] = &[
    "n",
    "delta",
    "h_delta",
    "h_delta_per_n",
    "j_star",
    "epsilon",
    "h_dagger_per_n",
];

fn smooth_explicit_rows(
    table: &mut Table,
    p: &FiniteDist,
    n: usize,
    deltas: &[f64],
) -> Result<(), Failure> {
    for &delta in deltas {
        let r = smooth_min_entropy_dist(p, delta)?;
        table.push(vec![
            n.into(),
            delta.into(),
            r.h_bits.into(),
            (r.h_bits / n as f64).into(),
            r.j_star.into(),
            r.epsilon.into(),
        ])?;
    }
    Ok(())
}

fn smooth_typeclass(
    letters: &[FiniteDist],
    weights: &[f64],
    ns: &[usize],
    deltas: &[f64],
) -> Outcome {
    sweep(ns, |n| {
        let spec = iid_spec(letters, weights, n)?;
        let mut table = Table::new("smooth", SMOOTH_TYPECLASS);
        let tc = TypeClassTable::mixed(&spec)?;
        for &delta in deltas {
            let s = tc.smooth(delta)?;
            let first = first_order_rate(&spec, delta)?.first_order;
            table.push(vec![
                n.into(),
                delta.into(),
                s.h_bits.into(),
                s.h_bits_per_symbol().into(),
                s.log2_j_star.into(),
                s.pivot_ones.into(),
                s.epsilon.into(),
                first.into(),
            ])?;
        }
        Ok(table)
    })
}

fn smooth_mixed_explicit(
    components: &[FiniteDist],
    weights: &[f64],
    n: usize,
    deltas: &[f64],
    grid_step: f64,
) -> Outcome {
    let spec = MixedSourceSpec::explicit(components.to_vec(), weights.to_vec())?;
    let mixed = mixture(&spec)?;
    let mut table = Table::new("smooth", SMOOTH_MIXED_EXPLICIT);
    for &delta in deltas {
        let r = smooth_min_entropy_dist(&mixed, delta)?;
        let dagger = dagger_smooth_entropy_finite(components, weights, delta, grid_step)?;
        table.push(vec![
            n.into(),
            delta.into(),
            r.h_bits.into(),
            (r.h_bits / n as f64).into(),
            r.j_star.into(),
            r.epsilon.into(),
            (dagger / n as f64).into(),
        ])?;
    }
    Ok(table)
}

pub fn smooth(spec: &ExperimentSpec) -> Outcome {
    let deltas = spec.require_deltas()?;
    match &spec.source {
        Source::Explicit(p) => {
            let mut table = Table::new("smooth", SMOOTH_EXPLICIT);
            smooth_explicit_rows(&mut table, p, explicit_n(spec)?, deltas)?;
            Ok(table)
        }
        Source::Iid(letter) => {
            let ns = require_blocklengths(spec, "an i.i.d. source")?;
            if letter.len() == 2 {
                return smooth_typeclass(std::slice::from_ref(letter), &[1.0], &ns, deltas);
            }
            sweep(&ns, |n| {
                let block = product_extension(&IidSpec::new(letter.clone(), n)?)?;
                let mut table = Table::new("smooth", SMOOTH_EXPLICIT);
                smooth_explicit_rows(&mut table, &block, n, deltas)?;
                Ok(table)
            })
        }
        Source::Mixed { letters, weights } => match spec.blocklengths() {
            None => smooth_mixed_explicit(letters, weights, 1, deltas, spec.grid_step),
            Some(ns) if is_binary(letters) => smooth_typeclass(letters, weights, &ns, deltas),
            Some(ns) => sweep(&ns, |n| {
                let blocks = iid_spec(letters, weights, n)?.materialize_components()?;
                smooth_mixed_explicit(&blocks, weights, n, deltas, spec.grid_step)
            }),
        },
    }
}

const RATES_FULL: &[&str] = &[
    "delta",
    "i_star",
    "i_star_component",
    "a_istar",
    "delta_istar",
    "rate_first",
    "rate_second",
];

fn component_details(report: &RateReport, weights: &[f64]) -> Value {
    Value::Array(
        report
            .per_component
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (c, w))| {
                json!({
                    "component": i,
                    "alpha": w,
                    "entropy_bits": c.entropy,
                    "varentropy_bits2": c.varentropy,
                })
            })
            .collect(),
    )
}

pub fn rates(spec: &ExperimentSpec) -> Outcome {
    let deltas = spec.require_deltas()?;
    let (letters, weights) = single_or_mixed(&spec.source)
        .ok_or_else(|| Failure::spec("rates needs i.i.d. components: use --iid or --component"))?;
    let source = iid_spec(&letters, &weights, spec.n.unwrap_or(1))?;
    let columns = if spec.first_only {
        &RATES_FULL[..RATES_FULL.len() - 1]
    } else {
        RATES_FULL
    };
    let mut table = Table::new("rates", columns);
    let mut last = None;
    for &delta in deltas {
        let r = if spec.first_only {
            first_order_rate(&source, delta)?
        } else {
            second_order_rate(&source, delta)?
        };
        let rank = r.order.iter().position(|&i| i == r.i_star).unwrap_or(0);
        let mut cells: Vec<Cell> = vec![
            delta.into(),
            (rank + 1).into(),
            r.i_star.into(),
            r.a_istar.into(),
            r.delta_istar.into(),
            r.first_order.into(),
        ];
        if let Some(s) = r.second_order {
            cells.push(s.into());
        }
        table.push(cells)?;
        last = Some(r);
    }
    if let Some(r) = last {
        table
            .extra
            .insert("components".into(), component_details(&r, &weights));
        table.extra.insert("entropy_order".into(), json!(r.order));
    }
    Ok(table)
}

const CODE_SINGLE: &[&str] = &[
    "n",
    "K",
    "gamma",
    "e_len",
    "e_len_per_n",
    "distance",
    "distance_bound",
    "length_bound",
];
const CODE_MIXED: &[&str] = &[
    "n",
    "K",
    "gamma",
    "e_len",
    "e_len_per_n",
    "distance",
    "mixture_distance",
    "distance_bound",
    "length_bound",
];

fn check_bounds(distance: f64, d_bound: f64, e_len: f64, l_bound: f64) -> Result<(), Failure> {
    if distance > d_bound + 1e-12 {
        return Err(Failure::invariant(format!(
            "distance {distance} exceeds bound {d_bound}"
        )));
    }
    if e_len > l_bound * (1.0 + 1e-12) {
        return Err(Failure::invariant(format!(
            "expected length {e_len} exceeds bound {l_bound}"
        )));
    }
    Ok(())
}

fn code_single(p: &FiniteDist, n: usize, spec: &ExperimentSpec, gammas: &[f64]) -> Outcome {
    let mut table = Table::new("code", CODE_SINGLE);
    for &gamma in gammas {
        let c = build_vlcode(p, spec.k, n, gamma)?;
        check_bounds(
            c.distance,
            c.distance_bound(),
            c.expected_length,
            c.length_bound(),
        )?;
        table.push(vec![
            n.into(),
            spec.k.into(),
            gamma.into(),
            c.expected_length.into(),
            (c.expected_length / n as f64).into(),
            c.distance.into(),
            c.distance_bound().into(),
            c.length_bound().into(),
        ])?;
    }
    Ok(table)
}

fn code_mixed(
    targets: &[FiniteDist],
    weights: &[f64],
    n: usize,
    spec: &ExperimentSpec,
    gammas: &[f64],
) -> Outcome {
    let mut table = Table::new("code", CODE_MIXED);
    for &gamma in gammas {
        let c = build_mixed_vlcode(targets, weights, spec.k, n, gamma)?;
        let d_bound = c.components[0].distance_bound();
        let l_bound: f64 = c
            .components
            .iter()
            .zip(&c.weights)
            .map(|(v, w)| w * v.length_bound())
            .sum();
        check_bounds(c.distance, d_bound, c.expected_length, l_bound)?;
        if c.mixture_distance > c.distance + 1e-12 {
            return Err(Failure::invariant(
                "mixture distance exceeds aggregate distance",
            ));
        }
        table.push(vec![
            n.into(),
            spec.k.into(),
            gamma.into(),
            c.expected_length.into(),
            (c.expected_length / n as f64).into(),
            c.distance.into(),
            c.mixture_distance.into(),
            d_bound.into(),
            l_bound.into(),
        ])?;
    }
    Ok(table)
}

pub fn code(spec: &ExperimentSpec) -> Outcome {
    let gammas = spec.require_gammas()?;
    match &spec.source {
        Source::Explicit(p) => code_single(p, explicit_n(spec)?, spec, gammas),
        Source::Iid(letter) => {
            let ns = require_blocklengths(spec, "an i.i.d. source")?;
            sweep(&ns, |n| {
                let block = product_extension(&IidSpec::new(letter.clone(), n)?)?;
                code_single(&block, n, spec, gammas)
            })
        }
        Source::Mixed { letters, weights } => match spec.blocklengths() {
            None => code_mixed(letters, weights, 1, spec, gammas),
            Some(ns) => sweep(&ns, |n| {
                let blocks = iid_spec(letters, weights, n)?.materialize_components()?;
                code_mixed(&blocks, weights, n, spec, gammas)
            }),
        },
    }
}

const FV_EXPLICIT: &[&str] = &[
    "n",
    "K",
    "delta",
    "kept",
    "error",
    "e_len",
    "e_len_per_n",
    "kraft",
    "h_delta_per_n",
];
const FV_TYPECLASS: &[&str] = &[
    "n",
    "K",
    "delta",
    "log2_kept",
    "error",
    "e_len",
    "e_len_per_n",
    "kraft",
    "h_delta_per_n",
    "rate_first",
];

fn check_fv(error: f64, delta: f64, kraft: f64) -> Result<(), Failure> {
    if error > delta + 1e-12 {
        return Err(Failure::invariant(format!(
            "FV error {error} exceeds delta {delta}"
        )));
    }
    if kraft > 1.0 + 1e-9 {
        return Err(Failure::invariant(format!("Kraft sum {kraft} exceeds one")));
    }
    Ok(())
}

fn fv_explicit(p: &FiniteDist, n: usize, spec: &ExperimentSpec, deltas: &[f64]) -> Outcome {
    let mut table = Table::new("fv", FV_EXPLICIT);
    for &delta in deltas {
        let c = build_fv_code(p, spec.k, n, delta)?;
        check_fv(c.error, delta, c.kraft)?;
        table.push(vec![
            n.into(),
            spec.k.into(),
            delta.into(),
            c.kept.len().into(),
            c.error.into(),
            c.expected_length.into(),
            c.rate().into(),
            c.kraft.into(),
            (smooth_entropy(p, delta)? / n as f64).into(),
        ])?;
    }
    Ok(table)
}

fn fv_typeclass(
    letters: &[FiniteDist],
    weights: &[f64],
    ns: &[usize],
    spec: &ExperimentSpec,
    deltas: &[f64],
) -> Outcome {
    sweep(ns, |n| {
        let source = iid_spec(letters, weights, n)?;
        let tc = TypeClassTable::mixed(&source)?;
        let mut table = Table::new("fv", FV_TYPECLASS);
        for &delta in deltas {
            let c = build_fv_code_typeclass(&tc, spec.k, delta)?;
            check_fv(c.error, delta, c.kraft)?;
            table.push(vec![
                n.into(),
                spec.k.into(),
                delta.into(),
                c.log2_kept.into(),
                c.error.into(),
                c.expected_length.into(),
                c.rate().into(),
                c.kraft.into(),
                tc.smooth(delta)?.h_bits_per_symbol().into(),
                first_order_rate(&source, delta)?.first_order.into(),
            ])?;
        }
        Ok(table)
    })
}

pub fn fv(spec: &ExperimentSpec) -> Outcome {
    let deltas = spec.require_deltas()?;
    match &spec.source {
        Source::Explicit(p) => fv_explicit(p, explicit_n(spec)?, spec, deltas),
        Source::Iid(letter) if letter.len() == 2 => {
            let ns = require_blocklengths(spec, "an i.i.d. source")?;
            fv_typeclass(std::slice::from_ref(letter), &[1.0], &ns, spec, deltas)
        }
        Source::Iid(letter) => {
            let ns = require_blocklengths(spec, "an i.i.d. source")?;
            sweep(&ns, |n| {
                let block = product_extension(&IidSpec::new(letter.clone(), n)?)?;
                fv_explicit(&block, n, spec, deltas)
            })
        }
        Source::Mixed { letters, weights } => match spec.blocklengths() {
            None => {
                let mixed = mixture(&MixedSourceSpec::explicit(
                    letters.clone(),
                    weights.clone(),
                )?)?;
                fv_explicit(&mixed, 1, spec, deltas)
            }
            Some(ns) if is_binary(letters) => fv_typeclass(letters, weights, &ns, spec, deltas),
            Some(ns) => sweep(&ns, |n| {
                let mixed = mixture(&iid_spec(letters, weights, n)?)?;
                fv_explicit(&mixed, n, spec, deltas)
            }),
        },
    }
}

const CONVERGE_FULL: &[&str] = &[
    "n",
    "delta",
    "h_delta_per_n",
    "rate_first",
    "gap",
    "rate_second",
    "residual_per_sqrt_n",
];

pub fn converge(spec: &ExperimentSpec) -> Outcome {
    let deltas = spec.require_deltas()?;
    let (letters, weights) = single_or_mixed(&spec.source)
        .filter(|(l, _)| is_binary(l))
        .ok_or_else(|| {
            Failure::spec("converge needs binary i.i.d. components (--iid p or --component p)")
        })?;
    let ns = require_blocklengths(spec, "converge")?;
    let columns = if spec.first_only {
        &CONVERGE_FULL[..5]
    } else {
        CONVERGE_FULL
    };
    sweep(&ns, |n| {
        let source = iid_spec(&letters, &weights, n)?;
        let tc = TypeClassTable::mixed(&source)?;
        let mut table = Table::new("converge", columns);
        for &delta in deltas {
            let h = tc.smooth(delta)?.h_bits;
            let report = if spec.first_only {
                first_order_rate(&source, delta)?
            } else {
                second_order_rate(&source, delta)?
            };
            let nf = n as f64;
            let mut cells: Vec<Cell> = vec![
                n.into(),
                delta.into(),
                (h / nf).into(),
                report.first_order.into(),
                (h / nf - report.first_order).into(),
            ];
            if let Some(second) = report.second_order {
                let residual = (h - nf * report.first_order - nf.sqrt() * second) / nf.sqrt();
                cells.push(second.into());
                cells.push(residual.into());
            }
            table.push(cells)?;
        }
        Ok(table)
    })
}
