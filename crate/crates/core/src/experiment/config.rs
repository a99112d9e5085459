use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::i_star;
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyKind};
use crate::set_function::{SetFunctionSpec, ENUMERATION_CAP};

/// Greedy stop level as written in a config: a number or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StopLevelRepr", into = "StopLevelRepr")]
pub enum StopLevel {
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StopLevelRepr {
    Fixed(usize),
    Word(String),
}

impl TryFrom<StopLevelRepr> for StopLevel {
    type Error = String;

    fn try_from(r: StopLevelRepr) -> std::result::Result<Self, String> {
        match r {
            StopLevelRepr::Fixed(l) => Ok(StopLevel::Fixed(l)),
            StopLevelRepr::Word(w) if w == "auto" => Ok(StopLevel::Auto),
            StopLevelRepr::Word(w) => Err(format!("stop level must be an integer or \"auto\", got {w:?}")),
        }
    }
}

impl From<StopLevel> for StopLevelRepr {
    fn from(l: StopLevel) -> Self {
        match l {
            StopLevel::Auto => StopLevelRepr::Word("auto".into()),
            StopLevel::Fixed(l) => StopLevelRepr::Fixed(l),
        }
    }
}

impl StopLevel {
    /// `k - i*(n, k, T)` for `Auto`, clamped to `[0, k]`.
    pub fn resolve(self, n: usize, k: usize, horizon: usize) -> usize {
        match self {
            StopLevel::Fixed(l) => l,
            StopLevel::Auto => k.saturating_sub(i_star(n, k, horizon as f64)),
        }
    }
}

/// A policy entry of the config; `T` and `k` come from the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyTemplate {
    SubUcb {
        l: StopLevel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Etcg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    UcbAll {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl PolicyTemplate {
    /// Explicit label, or one derived from the kind and parameters.
    pub fn label(&self) -> String {
        let with_m = |base: String, m: &Option<u64>| match m {
            Some(m) => format!("{base}[m={m}]"),
            None => base,
        };
        match self {
            PolicyTemplate::SubUcb { label: Some(s), .. }
            | PolicyTemplate::Etcg { label: Some(s), .. }
            | PolicyTemplate::UcbAll { label: Some(s) } => s.clone(),
            PolicyTemplate::SubUcb { l, m, .. } => {
                let l = match l {
                    StopLevel::Auto => "auto".to_string(),
                    StopLevel::Fixed(l) => l.to_string(),
                };
                with_m(format!("sub_ucb({l})"), m)
            }
            PolicyTemplate::Etcg { m, .. } => with_m("etcg".into(), m),
            PolicyTemplate::UcbAll { .. } => "ucb_all".into(),
        }
    }

    /// Concrete policy for horizon `T`.
    pub fn instantiate(&self, n: usize, k: usize, horizon: usize) -> PolicyConfig {
        let kind = match *self {
            PolicyTemplate::SubUcb { l, m, .. } => PolicyKind::SubUcb { l: l.resolve(n, k, horizon), m },
            PolicyTemplate::Etcg { m, .. } => PolicyKind::Etcg { m },
            PolicyTemplate::UcbAll { .. } => PolicyKind::UcbAll,
        };
        PolicyConfig { kind, horizon, k }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CheckpointsRepr", into = "CheckpointsRepr")]
pub enum Checkpoints {
    /// Powers of two up to `T`.
    Log,
    /// Explicit steps; entries above a cell's `T` are dropped for that cell.
    List(Vec<usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CheckpointsRepr {
    List(Vec<usize>),
    Word(String),
}

impl TryFrom<CheckpointsRepr> for Checkpoints {
    type Error = String;

    fn try_from(r: CheckpointsRepr) -> std::result::Result<Self, String> {
        match r {
            CheckpointsRepr::List(v) => Ok(Checkpoints::List(v)),
            CheckpointsRepr::Word(w) if w == "log" => Ok(Checkpoints::Log),
            CheckpointsRepr::Word(w) => Err(format!("checkpoints must be \"log\" or a list, got {w:?}")),
        }
    }
}

impl From<Checkpoints> for CheckpointsRepr {
    fn from(c: Checkpoints) -> Self {
        match c {
            Checkpoints::Log => CheckpointsRepr::Word("log".into()),
            Checkpoints::List(v) => CheckpointsRepr::List(v),
        }
    }
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Log
    }
}

impl Checkpoints {
    /// Sorted, deduplicated checkpoints for a run of length `horizon`.
    pub fn for_horizon(&self, horizon: usize) -> Vec<usize> {
        let mut out: Vec<usize> = match self {
            Checkpoints::Log => std::iter::successors(Some(1usize), |&t| t.checked_mul(2))
                .take_while(|&t| t <= horizon)
                .collect(),
            Checkpoints::List(v) => v.iter().copied().filter(|&t| t <= horizon).collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn default_sigma() -> f64 {
    1.0
}

fn default_trials() -> usize {
    50
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: SetFunctionSpec,
    pub n: usize,
    pub k: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(rename = "T_grid")]
    pub horizons: Vec<usize>,
    pub policies: Vec<PolicyTemplate>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub checkpoints: Checkpoints,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Parse(format!("field `{field}`: {msg}")));
        if self.n != self.function.n() {
            return bad("n", format!("{} does not match the function's ground set {}", self.n, self.function.n()));
        }
        if self.n > ENUMERATION_CAP {
            return Err(Error::GroundSetTooLarge { n: self.n, max: ENUMERATION_CAP });
        }
        if self.k == 0 || self.k > self.function.max_cardinality() {
            return bad(
                "k",
                format!("{} must lie in [1, {}]", self.k, self.function.max_cardinality()),
            );
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::NegativeSigma(self.sigma));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return bad("T_grid", "needs at least one horizon, all >= 1".into());
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("policies", "needs at least one policy".into());
        }
        let mut labels = Vec::new();
        for (i, p) in self.policies.iter().enumerate() {
            match p {
                PolicyTemplate::SubUcb { l: StopLevel::Fixed(l), .. } if *l > self.k => {
                    return Err(Error::InvalidStopLevel { l: *l, k: self.k });
                }
                PolicyTemplate::SubUcb { m: Some(0), .. } | PolicyTemplate::Etcg { m: Some(0), .. } => {
                    return bad(&format!("policies[{i}].m"), "must be at least 1".into());
                }
                _ => {}
            }
            let label = p.label();
            if label.is_empty() || label.contains([',', '"', '\n']) {
                return bad(&format!("policies[{i}].label"), format!("{label:?} is not a plain label"));
            }
            if labels.contains(&label) {
                return bad(&format!("policies[{i}]"), format!("duplicate policy label {label:?}"));
            }
            labels.push(label);
        }
        Ok(())
    }

    /// The desk-scale comparison: weighted cover, `n = 15`, `k = 4`,
    /// `sigma = 1`, Sub-UCB with automatic stop level against ETCG and UCB
    /// over all arms.
    pub fn cover_comparison(horizons: Vec<usize>, trials: usize) -> Self {
        ExperimentConfig {
            function: SetFunctionSpec::experiment_cover(),
            n: 15,
            k: 4,
            sigma: 1.0,
            checkpoints: Checkpoints::List(horizons.clone()),
            horizons,
            policies: vec![
                PolicyTemplate::SubUcb { l: StopLevel::Auto, m: None, label: None },
                PolicyTemplate::Etcg { m: None, label: None },
                PolicyTemplate::UcbAll { label: None },
            ],
            trials,
            base_seed: 2024,
            output_dir: default_output_dir(),
        }
    }
}
