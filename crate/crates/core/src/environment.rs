//! Noisy bandit oracle over a set function, with pull accounting and
//! trajectory recording.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set_function::{ItemSet, SetFunctionSpec};

/// One observation: the 1-based step index, the pulled set and the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub t: usize,
    pub set: ItemSet,
    pub reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    steps: Vec<Step>,
}

#[derive(Serialize, Deserialize)]
struct StepRow {
    t: usize,
    set: String,
    reward: String,
}

impl Trajectory {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn sets(&self) -> impl Iterator<Item = ItemSet> + '_ {
        self.steps.iter().map(|s| s.set)
    }

    /// Writes `t,set,reward` rows. Rewards carry 17 significant digits so
    /// that reading them back is exact.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.steps {
            w.serialize(StepRow { t: s.t, set: s.set.to_string(), reward: format_f64(s.reward) })
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut steps = Vec::new();
        for row in r.deserialize::<StepRow>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            if row.t != steps.len() + 1 {
                return Err(Error::Parse(format!("step {} follows step {}", row.t, steps.len())));
            }
            let reward = row
                .reward
                .parse()
                .map_err(|_| Error::Parse(format!("bad reward {:?}", row.reward)))?;
            steps.push(Step { t: row.t, set: row.set.parse()?, reward });
        }
        Ok(Trajectory { steps })
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Stochastic oracle returning `f(S) + sigma * g` with `g ~ N(0, 1)`.
///
/// Exactly one normal draw is consumed per pull, also when `sigma = 0`, so
/// the random stream depends only on the seed and the number of pulls.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    spec: SetFunctionSpec,
    sigma: f64,
    seed: u64,
    rng: ChaCha8Rng,
    pull_counts: HashMap<ItemSet, u64>,
    trajectory: Trajectory,
}

impl BanditEnv {
    pub fn new(spec: SetFunctionSpec, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::NegativeSigma(sigma));
        }
        Ok(BanditEnv {
            spec,
            sigma,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pull_counts: HashMap::new(),
            trajectory: Trajectory::default(),
        })
    }

    pub fn spec(&self) -> &SetFunctionSpec {
        &self.spec
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of pulls so far.
    pub fn t(&self) -> usize {
        self.trajectory.len()
    }

    pub fn pull(&mut self, set: ItemSet) -> Result<f64> {
        let mean = self.spec.evaluate(set)?;
        let g: f64 = self.rng.sample(StandardNormal);
        let reward = mean + self.sigma * g;
        *self.pull_counts.entry(set).or_insert(0) += 1;
        let t = self.trajectory.len() + 1;
        self.trajectory.steps.push(Step { t, set, reward });
        Ok(reward)
    }

    pub fn pull_count(&self, set: ItemSet) -> u64 {
        self.pull_counts.get(&set).copied().unwrap_or(0)
    }

    pub fn pull_counts(&self) -> &HashMap<ItemSet, u64> {
        &self.pull_counts
    }

    /// Total pulls per cardinality; sizes never pulled are absent.
    pub fn counts_by_cardinality(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for (s, &c) in &self.pull_counts {
            *out.entry(s.len()).or_insert(0) += c;
        }
        out
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }
}
