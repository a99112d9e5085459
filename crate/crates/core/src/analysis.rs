//! Regret against the three benchmarks, the closed-form lower/upper bound
//! evaluators, and the Gaussian KL diagnostic between two instances.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::environment::Trajectory;
use crate::error::{Error, Result};
use crate::policies::default_m;
use crate::set_function::table::ValueTable;
use crate::set_function::{
    approx_ratio, benchmark_on, binomial, curvature_on, opt_on, BestExtension, GreedyChain, ItemSet,
    SetFunctionSpec,
};

/// Everything regret accounting needs from an instance, computed once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Benchmarks {
    pub k: usize,
    pub opt_set: ItemSet,
    pub f_star: f64,
    pub curvature: f64,
    pub alpha: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub chain: GreedyChain,
}

impl Benchmarks {
    pub fn compute(spec: &SetFunctionSpec, k: usize) -> Result<Self> {
        let table = ValueTable::build(spec, k)?;
        if k > table.n() {
            return Err(Error::CardinalityExceeded { set: ItemSet::prefix(table.n()), size: k, max: table.n() });
        }
        let (opt_set, f_star) = opt_on(&table);
        let curvature = curvature_on(&table);
        let ext = BestExtension::new(&table);
        let (b, levels) = benchmark_on(&table, &ext, k);
        let chain = GreedyChain::from_levels(spec, levels)?;
        Ok(Benchmarks { k, opt_set, f_star, curvature, alpha: approx_ratio(curvature), b, chain })
    }
}

/// Shared memo of [`Benchmarks`] keyed by the serialized spec and `k`.
#[derive(Default)]
pub struct BenchmarkCache {
    map: RwLock<HashMap<(String, usize), Arc<Benchmarks>>>,
}

impl BenchmarkCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached entry or computes it. Concurrent misses may both
    /// compute, but only the first insert is kept.
    pub fn get(&self, spec: &SetFunctionSpec, k: usize) -> Result<Arc<Benchmarks>> {
        let key = (serde_json::to_string(spec).map_err(|e| Error::InvalidSpec(e.to_string()))?, k);
        if let Some(hit) = self.map.read().expect("cache lock poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(Benchmarks::compute(spec, k)?);
        let mut map = self.map.write().expect("cache lock poisoned");
        Ok(map.entry(key).or_insert(fresh).clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: usize,
    pub cum_reward: f64,
    pub regret_opt: f64,
    pub regret_alpha: f64,
    pub regret_gr: f64,
}

/// Pseudo-regret at each checkpoint: rewards are the noiseless values of the
/// pulled sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub f_star: f64,
    pub alpha: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub checkpoints: Vec<Checkpoint>,
}

pub fn regret_report(
    trajectory: &Trajectory,
    spec: &SetFunctionSpec,
    k: usize,
    checkpoints: &[usize],
) -> Result<RegretReport> {
    let bench = Benchmarks::compute(spec, k)?;
    regret_report_with(trajectory, spec, &bench, checkpoints)
}

pub fn regret_report_with(
    trajectory: &Trajectory,
    spec: &SetFunctionSpec,
    bench: &Benchmarks,
    checkpoints: &[usize],
) -> Result<RegretReport> {
    let len = trajectory.len();
    if let Some(&t) = checkpoints.iter().find(|&&t| t > len) {
        return Err(Error::CheckpointOutOfRange { t, len });
    }
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let mut cum = Vec::with_capacity(last + 1);
    cum.push(0.0);
    let mut total = 0.0;
    for step in &trajectory.steps()[..last] {
        total += spec.evaluate(step.set)?;
        cum.push(total);
    }
    let checkpoints = checkpoints
        .iter()
        .map(|&t| {
            let tf = t as f64;
            let c = cum[t];
            Checkpoint {
                t,
                cum_reward: c,
                regret_opt: tf * bench.f_star - c,
                regret_alpha: tf * bench.alpha * bench.f_star - c,
                regret_gr: tf * bench.b - c,
            }
        })
        .collect();
    Ok(RegretReport { f_star: bench.f_star, alpha: bench.alpha, b: bench.b, checkpoints })
}

fn lower_bound_ratio(n: usize, k: usize, i: usize) -> f64 {
    16.0 / ((n * n) as f64 * (k as f64).powi(6)) * binomial(n - k, i).powi(3)
}

/// Largest `i` in `1..=k` with `16 / (n^2 k^6) * C(n-k, i)^3 <= T`, or 0.
pub fn i_star(n: usize, k: usize, horizon: f64) -> usize {
    if k == 0 || k > n {
        return 0;
    }
    (1..=k).rev().find(|&i| lower_bound_ratio(n, k, i) <= horizon).unwrap_or(0)
}

/// Minimax lower bound value at `i* = i_star(n, k, T)`.
pub fn theorem1_bound(n: usize, k: usize, horizon: f64) -> Result<f64> {
    if n < 4 || k < 1 || k > n / 3 {
        return Err(Error::PreconditionViolated(format!(
            "lower bound needs n >= 4 and 1 <= k <= n/3, got n = {n}, k = {k}"
        )));
    }
    let i = i_star(n, k, horizon);
    let first = (k - i) as f64 / 16.0
        * horizon.powf(2.0 / 3.0)
        * (n as f64).cbrt()
        * (-16.0 - 2.0 * 16f64.cbrt()).exp();
    let second = 0.25 * horizon.sqrt() * binomial(n - k, i).sqrt() * (-2.0f64).exp();
    Ok(first + second)
}

/// Sub-UCB regret upper bound with stop level `l` (natural logarithms).
pub fn theorem2_bound(n: usize, k: usize, l: usize, horizon: f64) -> f64 {
    let ln_t = horizon.ln();
    let arms = binomial(n - k, k - l);
    (1.0 + 4.0 * 2f64.sqrt()) * l as f64 * horizon.powf(2.0 / 3.0) * (n as f64).cbrt() * ln_t.cbrt()
        + 65.0 * (horizon * arms * ln_t).sqrt()
        + 32.0 / 15.0 * arms
}

/// Closed-form quantities for one `(n, k, T)`; `l` defaults to `k - i*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSheet {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub i_star: usize,
    /// `None` when the lower bound's preconditions on `(n, k)` fail.
    pub theorem1_value: Option<f64>,
    pub theorem2_value: f64,
    pub default_m: u64,
}

pub fn bounds_sheet(n: usize, k: usize, horizon: f64, l: Option<usize>) -> Result<BoundsSheet> {
    if k > n {
        return Err(Error::PreconditionViolated(format!("k = {k} exceeds n = {n}")));
    }
    if horizon < 2.0 {
        return Err(Error::PreconditionViolated(format!("T must be at least 2, got {horizon}")));
    }
    let i = i_star(n, k, horizon);
    let l = l.unwrap_or(k - i);
    if l > k {
        return Err(Error::InvalidStopLevel { l, k });
    }
    Ok(BoundsSheet {
        n,
        k,
        l,
        horizon,
        i_star: i,
        theorem1_value: theorem1_bound(n, k, horizon).ok(),
        theorem2_value: theorem2_bound(n, k, l, horizon),
        default_m: default_m(horizon as usize, n),
    })
}

/// `Σ_S counts[S] (f0(S) - f1(S))^2 / (2 σ^2)`, the KL divergence between
/// the Gaussian observation laws of two instances under the given pull
/// counts. Terms are summed in set order, so the result does not depend on
/// the iteration order of `counts`.
pub fn kl_between<I>(f0: &SetFunctionSpec, f1: &SetFunctionSpec, counts: I, sigma: f64) -> Result<f64>
where
    I: IntoIterator<Item = (ItemSet, u64)>,
{
    if !(sigma > 0.0) {
        return Err(Error::ZeroSigma(sigma));
    }
    let mut counts: Vec<(ItemSet, u64)> = counts.into_iter().collect();
    counts.sort_unstable();
    let mut total = 0.0;
    for (s, c) in counts {
        let gap = f0.evaluate(s)? - f1.evaluate(s)?;
        total += c as f64 * gap * gap;
    }
    Ok(total / (2.0 * sigma * sigma))
}
