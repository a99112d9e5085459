use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::{regret_report_with, BenchmarkCache, Benchmarks};
use crate::environment::{format_f64, BanditEnv};
use crate::error::{Error, Result};
use crate::policies::{run_policy, PolicyKind};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One output line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub policy: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub trial: usize,
    pub seed: u64,
    pub checkpoint_t: usize,
    pub cum_reward: f64,
    pub regret_opt: f64,
    pub regret_alpha: f64,
    pub regret_gr: f64,
}

/// Resolved parameters of one (policy, T, trial) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub policy: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub trial: usize,
    pub seed: u64,
    pub l: Option<usize>,
    pub m: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub benchmarks: Benchmarks,
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit seed for a cell, independent of scheduling.
pub fn cell_seed(base_seed: u64, policy: usize, horizon: usize, trial: usize) -> u64 {
    [policy as u64, horizon as u64, trial as u64]
        .iter()
        .fold(mix(base_seed), |h, &x| mix(h.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ x))
}

struct Cell {
    policy: usize,
    horizon: usize,
    trial: usize,
}

/// Runs every cell on a pool of `jobs` threads (0 means rayon's default)
/// and returns rows sorted by (policy, T, trial, checkpoint).
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<RunOutput> {
    cfg.validate()?;
    let cache = BenchmarkCache::new();
    let bench = cache.get(&cfg.function, cfg.k)?;
    let labels: Vec<String> = cfg.policies.iter().map(|p| p.label()).collect();

    let mut cells = Vec::new();
    for policy in 0..cfg.policies.len() {
        for &horizon in &cfg.horizons {
            for trial in 0..cfg.trials {
                cells.push(Cell { policy, horizon, trial });
            }
        }
    }

    let run_cell = |cell: &Cell| -> Result<(CellRecord, Vec<ResultRow>)> {
        let policy = cfg.policies[cell.policy].instantiate(cfg.n, cfg.k, cell.horizon);
        let seed = cell_seed(cfg.base_seed, cell.policy, cell.horizon, cell.trial);
        let env = BanditEnv::new(cfg.function.clone(), cfg.sigma, seed)?;
        let run = run_policy(env, &policy)?;
        let checkpoints = cfg.checkpoints.for_horizon(cell.horizon);
        let report = regret_report_with(&run.trajectory, &cfg.function, &bench, &checkpoints)?;
        let label = &labels[cell.policy];
        let rows = report
            .checkpoints
            .iter()
            .map(|c| ResultRow {
                policy: label.clone(),
                horizon: cell.horizon,
                trial: cell.trial,
                seed,
                checkpoint_t: c.t,
                cum_reward: c.cum_reward,
                regret_opt: c.regret_opt,
                regret_alpha: c.regret_alpha,
                regret_gr: c.regret_gr,
            })
            .collect();
        let l = match policy.kind {
            PolicyKind::SubUcb { l, .. } => Some(l),
            _ => None,
        };
        let record = CellRecord {
            policy: label.clone(),
            horizon: cell.horizon,
            trial: cell.trial,
            seed,
            l,
            m: policy.resolved_m(cfg.n),
        };
        Ok((record, rows))
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::PreconditionViolated(format!("thread pool: {e}")))?;
    // Cells are enumerated in (policy, T, trial) order and collect keeps
    // that order, so the merge is independent of the thread count.
    let results: Vec<(CellRecord, Vec<ResultRow>)> =
        pool.install(|| cells.par_iter().map(run_cell).collect::<Result<_>>())?;

    let mut cell_records = Vec::with_capacity(results.len());
    let mut rows = Vec::new();
    for (record, mut r) in results {
        cell_records.push(record);
        rows.append(&mut r);
    }
    Ok(RunOutput {
        rows,
        manifest: Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            benchmarks: (*bench).clone(),
            cells: cell_records,
        },
    })
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_writer(fs::File::create(path).map_err(io)?);
    w.write_record([
        "policy",
        "T",
        "trial",
        "seed",
        "checkpoint_t",
        "cum_reward",
        "regret_opt",
        "regret_alpha",
        "regret_gr",
    ])
    .map_err(|e| Error::Parse(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.policy.clone(),
            r.horizon.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.checkpoint_t.to_string(),
            format_f64(r.cum_reward),
            format_f64(r.regret_opt),
            format_f64(r.regret_alpha),
            format_f64(r.regret_gr),
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush().map_err(io)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Parse(format!("{}: {e}", path.display()))))
        .collect()
}

/// Writes `results.csv` and `manifest.json` into `dir`, creating it.
pub fn write_output(out: &RunOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
    let results = dir.join(RESULTS_FILE);
    let manifest = dir.join(MANIFEST_FILE);
    write_results(&out.rows, &results)?;
    let text = serde_json::to_string_pretty(&out.manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&manifest, text + "\n").map_err(|e| Error::Parse(format!("{}: {e}", manifest.display())))?;
    Ok((results, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{Checkpoints, PolicyTemplate, StopLevel};
    use crate::set_function::SetFunctionSpec;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            function: SetFunctionSpec::harmonic_base(6, 2, 1.0 / 32.0).unwrap(),
            n: 6,
            k: 2,
            sigma: 1.0,
            horizons: vec![10, 40],
            policies: vec![
                PolicyTemplate::SubUcb { l: StopLevel::Fixed(1), m: Some(2), label: None },
                PolicyTemplate::UcbAll { label: None },
            ],
            trials: 3,
            base_seed: 11,
            checkpoints: Checkpoints::Log,
            output_dir: "unused".into(),
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = cell_seed(0, 0, 100, 0);
        assert_eq!(a, cell_seed(0, 0, 100, 0));
        let others = [cell_seed(1, 0, 100, 0), cell_seed(0, 1, 100, 0), cell_seed(0, 0, 101, 0), cell_seed(0, 0, 100, 1)];
        assert!(others.iter().all(|&s| s != a));
    }

    #[test]
    fn row_accounting_and_order() {
        let cfg = tiny();
        let out = run_experiment(&cfg, 2).unwrap();
        // log checkpoints: 4 for T = 10, 6 for T = 40
        assert_eq!(out.rows.len(), 2 * 3 * (4 + 6));
        assert_eq!(out.manifest.cells.len(), 2 * 2 * 3);
        let keys: Vec<_> = out.rows.iter().map(|r| (r.policy.clone(), r.horizon, r.trial, r.checkpoint_t)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| (a.0 != "sub_ucb(1)[m=2]", a.1, a.2, a.3).cmp(&(b.0 != "sub_ucb(1)[m=2]", b.1, b.2, b.3)));
        assert_eq!(keys, sorted);
        let single = run_experiment(&cfg, 1).unwrap();
        assert_eq!(single.rows, out.rows);
    }

    #[test]
    fn csv_roundtrip() {
        let out = run_experiment(&tiny(), 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (results, manifest) = write_output(&out, dir.path()).unwrap();
        assert_eq!(read_results(&results).unwrap(), out.rows);
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
        assert_eq!(m["cells"][0]["l"], 1);
        assert_eq!(m["cells"][0]["m"], 2);
    }
}
