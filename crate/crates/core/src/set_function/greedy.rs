//! Greedy chains, the exact optimum, and the robust-greedy benchmark.

use serde::{Deserialize, Serialize};

use super::itemset::ItemSet;
use super::properties::{approx_ratio, curvature_on};
use super::spec::SetFunctionSpec;
use super::table::ValueTable;
use crate::error::{Error, Result};

/// Slack for inequalities mixing `exp` and ratios.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Nested sets `S(1) ⊂ .. ⊂ S(k)` with `|S(i)| = i`, and the smallest slack
/// vector placing the chain in the ε-approximate greedy family:
/// `eps[i-1] = max(0, max_{a ∉ S(i-1)} f(S(i-1) ∪ {a}) - f(S(i)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyChain {
    pub levels: Vec<ItemSet>,
    pub eps: Vec<f64>,
}

impl GreedyChain {
    /// Chain obtained by adding `order[0]`, `order[1]`, ... in turn.
    pub fn from_order(spec: &SetFunctionSpec, order: &[usize]) -> Result<Self> {
        let n = spec.n();
        let mut levels = Vec::with_capacity(order.len());
        let mut cur = ItemSet::EMPTY;
        for &a in order {
            if a >= n {
                return Err(Error::OutOfRange { item: a, n });
            }
            if cur.contains(a) {
                return Err(Error::InvalidChain(format!("item {a} added twice")));
            }
            cur = cur.with(a);
            levels.push(cur);
        }
        Self::from_levels(spec, levels)
    }

    /// Checks nesting and computes the minimal slacks.
    pub fn from_levels(spec: &SetFunctionSpec, levels: Vec<ItemSet>) -> Result<Self> {
        let n = spec.n();
        let mut eps = Vec::with_capacity(levels.len());
        let mut prev = ItemSet::EMPTY;
        for (i, &level) in levels.iter().enumerate() {
            if level.len() != i + 1 || !prev.is_subset(level) {
                return Err(Error::InvalidChain(format!(
                    "level {} is {{{level}}}, not a one-item extension of {{{prev}}}",
                    i + 1
                )));
            }
            let mut best = f64::NEG_INFINITY;
            for a in (0..n).filter(|&a| !prev.contains(a)) {
                best = best.max(spec.evaluate(prev.with(a))?);
            }
            eps.push((best - spec.evaluate(level)?).max(0.0));
            prev = level;
        }
        Ok(GreedyChain { levels, eps })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn final_set(&self) -> ItemSet {
        self.levels.last().copied().unwrap_or(ItemSet::EMPTY)
    }

    pub fn total_slack(&self) -> f64 {
        self.eps.iter().sum()
    }

    /// `f(S(k)) + Σ eps`, the quantity the robust-greedy benchmark minimizes.
    pub fn cost(&self, spec: &SetFunctionSpec) -> Result<f64> {
        Ok(self.total_slack() + spec.evaluate(self.final_set())?)
    }
}

/// Noiseless greedy: at each level add the item of largest value, lowest
/// index on ties.
pub fn exact_greedy(spec: &SetFunctionSpec, k: usize) -> Result<GreedyChain> {
    let n = spec.n();
    if k > n {
        return Err(Error::CardinalityExceeded { set: ItemSet::prefix(n), size: k, max: n });
    }
    let mut order = Vec::with_capacity(k);
    let mut cur = ItemSet::EMPTY;
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for a in (0..n).filter(|&a| !cur.contains(a)) {
            let v = spec.evaluate(cur.with(a))?;
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((a, v));
            }
        }
        let (a, _) = best.expect("k <= n leaves a candidate");
        order.push(a);
        cur = cur.with(a);
    }
    GreedyChain::from_order(spec, &order)
}

/// Exact maximizer over `|S| <= k`; ties go to the lexicographically
/// smallest set.
pub fn brute_force_opt(spec: &SetFunctionSpec, k: usize) -> Result<(ItemSet, f64)> {
    let table = ValueTable::build(spec, k)?;
    Ok(opt_on(&table))
}

pub(crate) fn opt_on(table: &ValueTable) -> (ItemSet, f64) {
    let mut best = (ItemSet::EMPTY, table.get(ItemSet::EMPTY));
    for s in table.all_sets() {
        let v = table.get(s);
        if v > best.1 || (v == best.1 && s < best.0) {
            best = (s, v);
        }
    }
    best
}

/// `max_{b ∉ T} f(T ∪ {b})` for every `|T| < k`.
pub(crate) struct BestExtension {
    layers: Vec<Vec<f64>>,
}

impl BestExtension {
    pub(crate) fn new(table: &ValueTable) -> Self {
        let layers = (0..table.k())
            .map(|r| {
                table
                    .sets(r)
                    .map(|t| {
                        table
                            .complement(t)
                            .map(|b| table.get(t.with(b)))
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect()
            })
            .collect();
        BestExtension { layers }
    }

    pub(crate) fn get(&self, table: &ValueTable, set: ItemSet) -> f64 {
        self.layers[set.len()][table.rank(set)]
    }
}

fn require_chain_length(table: &ValueTable, k: usize) -> Result<()> {
    if k > table.n() {
        return Err(Error::CardinalityExceeded {
            set: ItemSet::prefix(table.n()),
            size: k,
            max: table.n(),
        });
    }
    Ok(())
}

/// Robust-greedy benchmark `B = min over chains of f(S(k)) + Σ eps`, by
/// dynamic programming over subsets, with a chain attaining it.
///
/// The chain cost splits into per-level slacks that depend only on two
/// consecutive levels, so `G(S)`, the cheapest slack total over chains
/// ending in `S`, satisfies
/// `G(S) = min_{a ∈ S} G(S∖a) + max(0, best_ext(S∖a) - f(S))`.
pub fn greedy_benchmark(spec: &SetFunctionSpec, k: usize) -> Result<(f64, GreedyChain)> {
    let table = ValueTable::build(spec, k)?;
    require_chain_length(&table, k)?;
    let ext = BestExtension::new(&table);
    let (b, levels) = benchmark_on(&table, &ext, k);
    let eps = chain_slacks(&table, &ext, &levels);
    Ok((b, GreedyChain { levels, eps }))
}

fn chain_slacks(table: &ValueTable, ext: &BestExtension, levels: &[ItemSet]) -> Vec<f64> {
    let mut prev = ItemSet::EMPTY;
    levels
        .iter()
        .map(|&s| {
            let e = (ext.get(table, prev) - table.get(s)).max(0.0);
            prev = s;
            e
        })
        .collect()
}

pub(crate) fn benchmark_on(table: &ValueTable, ext: &BestExtension, k: usize) -> (f64, Vec<ItemSet>) {
    // g[r][rank] = (G(S), predecessor of S on a cheapest chain)
    let mut g: Vec<Vec<(f64, ItemSet)>> = vec![vec![(0.0, ItemSet::EMPTY)]];
    for r in 1..=k {
        let layer = table
            .sets(r)
            .map(|s| {
                let fs = table.get(s);
                let mut best = (f64::INFINITY, ItemSet::EMPTY);
                for a in s.iter() {
                    let prev = s.without(a);
                    let cost = g[r - 1][table.rank(prev)].0 + (ext.get(table, prev) - fs).max(0.0);
                    if cost < best.0 || (cost == best.0 && prev < best.1) {
                        best = (cost, prev);
                    }
                }
                best
            })
            .collect();
        g.push(layer);
    }

    let mut best: Option<(f64, ItemSet)> = None;
    for s in table.sets(k) {
        let total = g[k][table.rank(s)].0 + table.get(s);
        if best.map_or(true, |(bv, bs)| total < bv || (total == bv && s < bs)) {
            best = Some((total, s));
        }
    }
    let (value, last) = best.expect("k <= n leaves at least one set");

    let mut levels = vec![ItemSet::EMPTY; k];
    let mut cur = last;
    for r in (1..=k).rev() {
        levels[r - 1] = cur;
        cur = g[r][table.rank(cur)].1;
    }
    (value, levels)
}

/// Smallest chain cost over every ordered sequence of `k` distinct items,
/// by depth-first enumeration. Returns the minimum and the number of
/// sequences visited.
pub fn min_chain_cost_by_enumeration(spec: &SetFunctionSpec, k: usize) -> Result<(f64, u64)> {
    let table = ValueTable::build(spec, k)?;
    require_chain_length(&table, k)?;
    let ext = BestExtension::new(&table);
    let mut best = f64::INFINITY;
    let mut visited = 0u64;
    enumerate_chains(&table, &ext, k, ItemSet::EMPTY, 0.0, &mut best, &mut visited);
    Ok((best, visited))
}

fn enumerate_chains(
    table: &ValueTable,
    ext: &BestExtension,
    k: usize,
    cur: ItemSet,
    slack: f64,
    best: &mut f64,
    visited: &mut u64,
) {
    if cur.len() == k {
        *visited += 1;
        *best = best.min(slack + table.get(cur));
        return;
    }
    let top = ext.get(table, cur);
    for a in table.complement(cur) {
        let next = cur.with(a);
        let e = (top - table.get(next)).max(0.0);
        enumerate_chains(table, ext, k, next, slack + e, best, visited);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Check {
    pub ok: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Right-hand side of the curvature bound, `α(c) · f(S*)`, precomputed so
/// that many chains can be checked against one instance.
pub struct Lemma1Verifier {
    k: usize,
    rhs: f64,
}

impl Lemma1Verifier {
    pub fn new(spec: &SetFunctionSpec, k: usize) -> Result<Self> {
        let table = ValueTable::build(spec, k)?;
        let c = curvature_on(&table);
        let (_, f_star) = opt_on(&table);
        Ok(Lemma1Verifier { k, rhs: approx_ratio(c) * f_star })
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn check(&self, spec: &SetFunctionSpec, chain: &GreedyChain) -> Result<Lemma1Check> {
        if chain.len() != self.k || chain.eps.len() != self.k {
            return Err(Error::InvalidChain(format!(
                "chain has {} levels, expected {}",
                chain.len(),
                self.k
            )));
        }
        let lhs = chain.cost(spec)?;
        Ok(Lemma1Check { ok: lhs >= self.rhs - INEQUALITY_TOL, lhs, rhs: self.rhs })
    }
}

/// `f(S(k)) + Σ eps >= (1 - e^{-c})/c · f(S*)` for the given chain.
pub fn verify_lemma1(spec: &SetFunctionSpec, k: usize, chain: &GreedyChain) -> Result<Lemma1Check> {
    Lemma1Verifier::new(spec, k)?.check(spec, chain)
}
