//! Bandit policies over sets: Sub-UCB with a greedy stop level, the
//! explore-then-commit greedy baseline (ETCG), and plain UCB over every
//! feasible super-arm.
//!
//! Every policy gates each pull on `t < T`, so trajectories always have
//! exactly `T` steps.

use serde::{Deserialize, Serialize};

use crate::environment::{BanditEnv, Trajectory};
use crate::error::{Error, Result};
use crate::set_function::{binomial, ItemSet};

/// Memory guard on the number of super-arms tracked by UCB.
pub const MAX_ARMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    SubUcb {
        l: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<u64>,
    },
    Etcg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<u64>,
    },
    UcbAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    #[serde(flatten)]
    pub kind: PolicyKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub k: usize,
}

impl PolicyConfig {
    pub fn sub_ucb(l: usize, m: Option<u64>, horizon: usize, k: usize) -> Self {
        PolicyConfig { kind: PolicyKind::SubUcb { l, m }, horizon, k }
    }

    pub fn etcg(m: Option<u64>, horizon: usize, k: usize) -> Self {
        PolicyConfig { kind: PolicyKind::Etcg { m }, horizon, k }
    }

    pub fn ucb_all(horizon: usize, k: usize) -> Self {
        PolicyConfig { kind: PolicyKind::UcbAll, horizon, k }
    }

    /// Per-arm sample budget actually used for a ground set of size `n`.
    pub fn resolved_m(&self, n: usize) -> Option<u64> {
        match self.kind {
            PolicyKind::SubUcb { m, .. } | PolicyKind::Etcg { m } => {
                Some(m.unwrap_or_else(|| default_m(self.horizon, n)))
            }
            PolicyKind::UcbAll => None,
        }
    }
}

/// `ceil(T^{2/3} n^{-2/3} (ln T)^{1/3})`, at least 1.
pub fn default_m(horizon: usize, n: usize) -> u64 {
    let t = horizon as f64;
    let raw = t.powf(2.0 / 3.0) * (n as f64).powf(-2.0 / 3.0) * t.ln().max(0.0).cbrt();
    (raw.ceil() as u64).max(1)
}

/// Result of a policy run: the trajectory plus the greedy levels the policy
/// fixed before its final phase (empty for UCB over all arms).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub trajectory: Trajectory,
    pub levels: Vec<ItemSet>,
}

/// Pull counts and empirical means for a list of candidate arms.
///
/// The index `mean + sqrt(8 ln t / count)` is evaluated as
/// `mean + sqrt(ln t) * sqrt(8 / count)`, with the second factor cached per
/// arm so a scan over many arms costs one multiply-add each.
#[derive(Debug, Clone)]
pub struct ArmStats {
    arms: Vec<ItemSet>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    means: Vec<f64>,
    widths: Vec<f64>,
}

impl ArmStats {
    pub fn new(arms: Vec<ItemSet>) -> Self {
        let len = arms.len();
        ArmStats {
            arms,
            counts: vec![0; len],
            sums: vec![0.0; len],
            means: vec![0.0; len],
            widths: vec![f64::INFINITY; len],
        }
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn arm(&self, i: usize) -> ItemSet {
        self.arms[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    pub fn record(&mut self, i: usize, reward: f64) {
        self.counts[i] += 1;
        self.sums[i] += reward;
        self.means[i] = self.sums[i] / self.counts[i] as f64;
        self.widths[i] = (8.0 / self.counts[i] as f64).sqrt();
    }

    /// Upper confidence index at global step `t`; `+inf` before the first pull.
    pub fn index(&self, i: usize, t: usize) -> f64 {
        if self.counts[i] == 0 {
            f64::INFINITY
        } else {
            self.means[i] + log_factor(t) * self.widths[i]
        }
    }

    /// Arm with the largest index, earliest position on ties.
    pub fn argmax_index(&self, t: usize) -> usize {
        let s = log_factor(t);
        let mut best = 0;
        let mut best_u = f64::NEG_INFINITY;
        for i in 0..self.arms.len() {
            let u = if self.counts[i] == 0 { f64::INFINITY } else { self.means[i] + s * self.widths[i] };
            if u > best_u {
                best_u = u;
                best = i;
                if u == f64::INFINITY {
                    break;
                }
            }
        }
        best
    }

    /// Arm with the largest empirical mean, earliest position on ties.
    pub fn argmax_mean(&self) -> usize {
        let mut best = 0;
        for i in 1..self.arms.len() {
            if self.means[i] > self.means[best] {
                best = i;
            }
        }
        best
    }
}

fn log_factor(t: usize) -> f64 {
    (t.max(1) as f64).ln().sqrt()
}

fn check_fresh(env: &BanditEnv) -> Result<()> {
    if env.t() != 0 {
        return Err(Error::PreconditionViolated(format!(
            "policy needs a fresh environment, found t = {}",
            env.t()
        )));
    }
    Ok(())
}

fn check_config(env: &BanditEnv, cfg: &PolicyConfig) -> Result<usize> {
    check_fresh(env)?;
    let n = env.spec().n();
    if cfg.horizon == 0 {
        return Err(Error::PreconditionViolated("horizon T must be at least 1".into()));
    }
    if cfg.k > n {
        return Err(Error::PreconditionViolated(format!("k = {} exceeds n = {n}", cfg.k)));
    }
    if let Some(0) = match cfg.kind {
        PolicyKind::SubUcb { m, .. } | PolicyKind::Etcg { m } => m,
        PolicyKind::UcbAll => None,
    } {
        return Err(Error::PreconditionViolated("m must be at least 1".into()));
    }
    Ok(n)
}

/// Dispatches on the policy kind.
pub fn run_policy(env: BanditEnv, cfg: &PolicyConfig) -> Result<PolicyRun> {
    match cfg.kind {
        PolicyKind::SubUcb { .. } => run_sub_ucb(env, cfg),
        PolicyKind::Etcg { .. } => run_etcg(env, cfg),
        PolicyKind::UcbAll => {
            let trajectory = run_ucb_all(env, cfg.horizon, cfg.k, ItemSet::EMPTY)?;
            Ok(PolicyRun { trajectory, levels: Vec::new() })
        }
    }
}

/// Sub-UCB: greedy levels `1..=l` chosen by UCB with per-arm budget `m`,
/// then UCB over every size-`k` superset of the last level.
///
/// With `l = 0` the singleton phase is skipped and the run coincides with
/// [`run_ucb_all`] from the empty base.
pub fn run_sub_ucb(mut env: BanditEnv, cfg: &PolicyConfig) -> Result<PolicyRun> {
    let PolicyKind::SubUcb { l, .. } = cfg.kind else {
        return Err(Error::PreconditionViolated("expected a sub_ucb config".into()));
    };
    if l > cfg.k {
        return Err(Error::InvalidStopLevel { l, k: cfg.k });
    }
    let n = check_config(&env, cfg)?;
    let horizon = cfg.horizon;
    let m = cfg.resolved_m(n).expect("sub_ucb has a budget");
    let mut levels = Vec::with_capacity(l);
    let mut base = ItemSet::EMPTY;

    if l > 0 {
        let mut stats = ArmStats::new((0..n).map(ItemSet::singleton).collect());
        'singletons: for i in 0..n {
            for _ in 0..m {
                if env.t() >= horizon {
                    break 'singletons;
                }
                let r = env.pull(stats.arm(i))?;
                stats.record(i, r);
            }
        }

        for level in 1..=l {
            if level > 1 {
                stats = ArmStats::new((0..n).filter(|&a| !base.contains(a)).map(|a| base.with(a)).collect());
            }
            let chosen = loop {
                let best = stats.argmax_index(env.t());
                if stats.count(best) >= m || env.t() >= horizon {
                    break best;
                }
                let r = env.pull(stats.arm(best))?;
                stats.record(best, r);
            };
            if env.t() >= horizon {
                return Ok(PolicyRun { trajectory: env.into_trajectory(), levels });
            }
            base = stats.arm(chosen);
            levels.push(base);
        }
    }

    let trajectory = ucb_phase(env, horizon, cfg.k, base)?;
    Ok(PolicyRun { trajectory, levels })
}

/// Explore-then-commit greedy: each level samples every one-item extension
/// `m` times (arm by arm), keeps the best empirical mean, and after `k`
/// levels commits to the final set.
pub fn run_etcg(mut env: BanditEnv, cfg: &PolicyConfig) -> Result<PolicyRun> {
    if !matches!(cfg.kind, PolicyKind::Etcg { .. }) {
        return Err(Error::PreconditionViolated("expected an etcg config".into()));
    }
    let n = check_config(&env, cfg)?;
    let horizon = cfg.horizon;
    let m = cfg.resolved_m(n).expect("etcg has a budget");
    let mut levels = Vec::with_capacity(cfg.k);
    let mut base = ItemSet::EMPTY;

    for _ in 0..cfg.k {
        let mut stats = ArmStats::new((0..n).filter(|&a| !base.contains(a)).map(|a| base.with(a)).collect());
        for i in 0..stats.len() {
            for _ in 0..m {
                if env.t() >= horizon {
                    return Ok(PolicyRun { trajectory: env.into_trajectory(), levels });
                }
                let r = env.pull(stats.arm(i))?;
                stats.record(i, r);
            }
        }
        base = stats.arm(stats.argmax_mean());
        levels.push(base);
    }
    while env.t() < horizon {
        env.pull(base)?;
    }
    Ok(PolicyRun { trajectory: env.into_trajectory(), levels })
}

/// UCB over every size-`k` set containing `base`: one initial pull per arm
/// in lexicographic order, then the largest index, lexicographically first
/// on ties.
pub fn run_ucb_all(env: BanditEnv, horizon: usize, k: usize, base: ItemSet) -> Result<Trajectory> {
    let cfg = PolicyConfig::ucb_all(horizon, k);
    check_config(&env, &cfg)?;
    if base.len() > k {
        return Err(Error::CardinalityExceeded { set: base, size: base.len(), max: k });
    }
    if let Some(item) = base.max_item().filter(|&i| i >= env.spec().n()) {
        return Err(Error::OutOfRange { item, n: env.spec().n() });
    }
    ucb_phase(env, horizon, k, base)
}

/// Size-`k` supersets of `base` within `[0, n)`, in lexicographic order.
pub fn supersets_of_size(n: usize, k: usize, base: ItemSet) -> Result<Vec<ItemSet>> {
    let free: Vec<usize> = (0..n).filter(|&a| !base.contains(a)).collect();
    let need = k.saturating_sub(base.len());
    let count = binomial(free.len(), need);
    if count > MAX_ARMS as f64 {
        return Err(Error::TooManyArms { count, max: MAX_ARMS });
    }
    let mut arms: Vec<ItemSet> = crate::set_function::subsets_of_size(free.len(), need)
        .map(|pick| pick.iter().fold(base, |s, j| s.with(free[j])))
        .collect();
    arms.sort_unstable();
    Ok(arms)
}

fn ucb_phase(mut env: BanditEnv, horizon: usize, k: usize, base: ItemSet) -> Result<Trajectory> {
    let arms = supersets_of_size(env.spec().n(), k, base)?;
    let mut stats = ArmStats::new(arms);
    // Unpulled arms have infinite index and the scan keeps the first, so the
    // initialization round follows the arm order.
    while env.t() < horizon {
        let i = stats.argmax_index(env.t());
        let r = env.pull(stats.arm(i))?;
        stats.record(i, r);
    }
    Ok(env.into_trajectory())
}
