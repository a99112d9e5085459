//! Instance generators and brute-force oracles shared by the integration
//! tests. Nothing here calls the library's own benchmark or greedy code.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sublab::set_function::{subsets_up_to, ItemSet, SetFunctionSpec};

pub fn set(items: &[usize]) -> ItemSet {
    ItemSet::from_items(items.iter().copied()).unwrap()
}

/// Weighted coverage: item `i` covers a random subset of a small universe
/// of weighted elements; `f(S)` is the covered weight over the total.
pub fn random_coverage(rng: &mut impl Rng, n: usize, k: usize) -> SetFunctionSpec {
    let universe = rng.random_range(3..=10usize);
    let weights: Vec<f64> = (0..universe).map(|_| rng.random_range(0.05..1.0)).collect();
    let covers: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..universe).filter(|_| rng.random_bool(0.35)).collect())
        .collect();
    let total: f64 = weights.iter().sum();
    let f = |s: ItemSet| {
        let mut hit = vec![false; universe];
        for i in s.iter() {
            for &u in &covers[i] {
                hit[u] = true;
            }
        }
        hit.iter().zip(&weights).filter(|(h, _)| **h).map(|(_, w)| w).sum::<f64>() / total
    };
    tabulate_with(n, k, f)
}

/// Sum of concave functions (`sqrt`, `1 - e^{-x}`, `min(x, cap)`) of
/// nonnegative modular functions, scaled into `[0, 1]`.
pub fn random_concave_of_modular(rng: &mut impl Rng, n: usize, k: usize) -> SetFunctionSpec {
    let parts = rng.random_range(1..=3usize);
    let mut terms = Vec::new();
    for _ in 0..parts {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let shape = rng.random_range(0..3u8);
        let cap = rng.random_range(0.5..2.0);
        terms.push((w, shape, cap));
    }
    let raw = |s: ItemSet| -> f64 {
        terms
            .iter()
            .map(|(w, shape, cap)| {
                let x: f64 = s.iter().map(|i| w[i]).sum();
                match shape {
                    0 => x.sqrt(),
                    1 => 1.0 - (-x).exp(),
                    _ => x.min(*cap),
                }
            })
            .sum()
    };
    let scale = subsets_up_to(n, k).map(raw).fold(0.0, f64::max).max(1e-9);
    tabulate_with(n, k, |s| raw(s) / scale)
}

pub fn random_instance(seed: u64, max_n: usize, max_k: usize) -> (SetFunctionSpec, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let k = rng.random_range(1..=max_k.min(n));
    let spec = if rng.random_bool(0.5) {
        random_coverage(&mut rng, n, k)
    } else {
        random_concave_of_modular(&mut rng, n, k)
    };
    (spec, k)
}

fn tabulate_with(n: usize, k: usize, f: impl Fn(ItemSet) -> f64) -> SetFunctionSpec {
    let table: HashMap<ItemSet, f64> =
        subsets_up_to(n, k).filter(|s| !s.is_empty()).map(|s| (s, f(s).clamp(0.0, 1.0))).collect();
    SetFunctionSpec::tabular(n, k, table).unwrap()
}

/// One ordered chain with its slack vector, straight from the definition.
#[derive(Debug, Clone)]
pub struct EnumeratedChain {
    pub order: Vec<usize>,
    pub eps: Vec<f64>,
    /// `0 + eps_1 + .. + eps_k`, then `+ f(final)`.
    pub cost: f64,
}

/// Every ordered sequence of `k` distinct items.
pub fn enumerate_chains(spec: &SetFunctionSpec, k: usize) -> Vec<EnumeratedChain> {
    let n = spec.n();
    let mut out = Vec::new();
    let mut order = Vec::with_capacity(k);
    walk(spec, n, k, &mut order, &mut out);
    out
}

fn walk(spec: &SetFunctionSpec, n: usize, k: usize, order: &mut Vec<usize>, out: &mut Vec<EnumeratedChain>) {
    if order.len() == k {
        let mut prev = ItemSet::EMPTY;
        let mut eps = Vec::with_capacity(k);
        let mut slack = 0.0;
        for &a in order.iter() {
            let best = (0..n)
                .filter(|&b| !prev.contains(b))
                .map(|b| spec.evaluate(prev.with(b)).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let cur = prev.with(a);
            let e = (best - spec.evaluate(cur).unwrap()).max(0.0);
            eps.push(e);
            slack += e;
            prev = cur;
        }
        let cost = slack + spec.evaluate(prev).unwrap();
        out.push(EnumeratedChain { order: order.clone(), eps, cost });
        return;
    }
    for a in 0..n {
        if !order.contains(&a) {
            order.push(a);
            walk(spec, n, k, order, out);
            order.pop();
        }
    }
}

pub fn min_cost(chains: &[EnumeratedChain]) -> f64 {
    chains.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min)
}

/// Harmonic increment sum `1/(k+1) + .. + 1/(k+s)`.
pub fn harmonic_sum(k: usize, s: usize) -> f64 {
    (1..=s).map(|i| 1.0 / (k + i) as f64).sum()
}

/// `H_{2k} - H_k`.
pub fn harmonic_gap(k: usize) -> f64 {
    harmonic_sum(k, k)
}
