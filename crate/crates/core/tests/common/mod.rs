//! Shared test helpers: random generators and oracles that do not reuse the
//! library's own constructions.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use resolv::FiniteDist;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Symmetric Dirichlet sample with the given concentration.
pub fn dirichlet(rng: &mut ChaCha8Rng, size: usize, concentration: f64) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).unwrap();
    loop {
        let raw: Vec<f64> = (0..size).map(|_| g.sample(rng)).collect();
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            return raw.into_iter().map(|x| x / sum).collect();
        }
    }
}

pub fn random_dist(rng: &mut ChaCha8Rng, size: usize) -> FiniteDist {
    let concentration = [0.2, 0.5, 1.0, 3.0][rng.random_range(0..4)];
    FiniteDist::new(dirichlet(rng, size, concentration)).unwrap()
}

/// Entropy in bits straight from the definition.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// A member of the `delta`-ball around `p`: move from `p` towards a random
/// Dirichlet point, stopping on the ball boundary when the point lies outside.
/// Statistical coverage only; the ball is not enumerated.
pub fn ball_member(rng: &mut ChaCha8Rng, p: &[f64], delta: f64) -> Vec<f64> {
    let concentration = [0.05, 0.3, 1.0, 5.0][rng.random_range(0..4)];
    let target = dirichlet(rng, p.len(), concentration);
    let dist = tv(p, &target);
    let shrink = if rng.random_bool(0.2) {
        rng.random::<f64>()
    } else {
        1.0
    };
    let lambda = if dist > 0.0 {
        (delta / dist).min(1.0) * shrink
    } else {
        0.0
    };
    p.iter()
        .zip(&target)
        .map(|(&a, &b)| (a + lambda * (b - a)).max(0.0))
        .collect()
}

/// Minimizer of entropy over the `delta`-ball by direct mass transport:
/// repeatedly drain the smallest remaining atom into the largest one until
/// `delta` has been moved.
pub fn drain_oracle(p: &[f64], delta: f64) -> Vec<f64> {
    let mut v = p.to_vec();
    let top = (0..v.len())
        .max_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(b.cmp(&a)))
        .unwrap();
    let mut budget = delta;
    while budget > 0.0 {
        let smallest = (0..v.len())
            .filter(|&i| i != top && v[i] > 0.0)
            .min_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(b.cmp(&a)));
        let Some(i) = smallest else { break };
        let moved = v[i].min(budget);
        v[i] -= moved;
        v[top] += moved;
        budget -= moved;
    }
    v
}

/// Bernoulli letter with `P(symbol 0) = p`.
pub fn bern(p: f64) -> FiniteDist {
    FiniteDist::binary(p).unwrap()
}
