//! Experiment configs, the parallel trial runner, result persistence, SVG
//! plotting, and the subcommands of the `sublab` binary.
//!
//! Every `cmd_*` function writes human-readable (or `--json`) output to
//! `out`, diagnostics to `err`, and returns the process exit code.

pub mod config;
pub mod plot;
pub mod run;
pub mod verify;

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{Checkpoints, ExperimentConfig, PolicyTemplate, StopLevel};
pub use plot::{render_svg, summarize, CellSummary, SeriesSummary};
pub use run::{cell_seed, read_results, run_experiment, write_output, ResultRow, RunOutput};
pub use verify::{parse_target, verify, VerifyReport, VerifyTarget};

use crate::analysis::bounds_sheet;
use crate::environment::format_f64;
use crate::error::{Error, Result};
use crate::set_function::{subsets_up_to, tabulate, ItemSet, SetFunctionSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Resource guards map to 3, everything else is an input error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TooManyArms { .. } | Error::GroundSetTooLarge { .. } => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

fn fail(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    exit_code(e)
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

pub fn cmd_run(config: &Path, out_dir: Option<&Path>, jobs: usize, as_json: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let dir: PathBuf = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    let output = match run_experiment(&cfg, jobs) {
        Ok(o) => o,
        Err(e) => return fail(err, &e),
    };
    let (results, manifest) = match write_output(&output, &dir) {
        Ok(p) => p,
        Err(e) => return fail(err, &e),
    };
    let series = summarize(&output.rows);
    if as_json {
        emit_json(out, &json!({ "results": results, "manifest": manifest, "rows": output.rows.len(), "summary": series }));
    } else {
        let _ = writeln!(out, "wrote {} rows to {}", output.rows.len(), results.display());
        let _ = writeln!(out, "manifest: {}", manifest.display());
        let _ = writeln!(out, "{:<24} {:>10} {:>8} {:>16} {:>12}", "policy", "T", "trials", "mean regret_gr", "std err");
        for s in &series {
            for c in &s.cells {
                let _ = writeln!(out, "{:<24} {:>10} {:>8} {:>16.4} {:>12.4}", s.policy, c.horizon, c.trials, c.mean, c.std_err);
            }
        }
    }
    EXIT_OK
}

pub fn cmd_verify(target: &str, k: Option<usize>, as_json: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match parse_target(target, k).and_then(|t| verify(&t)) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    if as_json {
        emit_json(out, &serde_json::to_value(&report).expect("report serializes"));
    } else {
        let _ = write!(out, "{}", report.to_text());
    }
    if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

pub fn cmd_bounds(n: usize, k: usize, horizon: f64, l: Option<usize>, as_json: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let sheet = match bounds_sheet(n, k, horizon, l) {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    if as_json {
        emit_json(out, &serde_json::to_value(&sheet).expect("sheet serializes"));
    } else {
        let t1 = sheet.theorem1_value.map_or("n/a (needs n >= 4, 1 <= k <= n/3)".to_string(), |v| v.to_string());
        let _ = writeln!(out, "n = {}, k = {}, T = {}", sheet.n, sheet.k, sheet.horizon);
        let _ = writeln!(out, "i_star      {}", sheet.i_star);
        let _ = writeln!(out, "l           {}", sheet.l);
        let _ = writeln!(out, "theorem1    {t1}");
        let _ = writeln!(out, "theorem2    {}", sheet.theorem2_value);
        let _ = writeln!(out, "default_m   {}", sheet.default_m);
    }
    EXIT_OK
}

pub fn cmd_plot(results: &Path, svg_path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let rendered = read_results(results).and_then(|rows| render_svg(&rows));
    let svg = match rendered {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    if let Err(e) = std::fs::write(svg_path, svg) {
        return fail(err, &Error::Parse(format!("{}: {e}", svg_path.display())));
    }
    let _ = writeln!(out, "wrote {}", svg_path.display());
    EXIT_OK
}

/// Every non-empty set of size at most `k` with its value, ordered by size
/// and then lexicographically.
pub fn instance_rows(spec: &SetFunctionSpec, k: usize) -> Result<Vec<(ItemSet, f64)>> {
    let k = k.min(spec.n());
    let mut sets: Vec<ItemSet> = subsets_up_to(spec.n(), k).filter(|s| !s.is_empty()).collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    sets.into_iter().map(|s| Ok((s, spec.evaluate(s)?))).collect()
}

pub fn write_instance_csv<W: Write>(rows: &[(ItemSet, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["set", "value"]).map_err(csv_err)?;
    for (s, v) in rows {
        w.write_record([s.to_string(), format_f64(*v)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Loads a `set,value` table as a [`Tabular`](crate::set_function::Tabular)
/// spec on `[0, n)` with maximum cardinality `k_max`.
pub fn read_instance_csv<R: Read>(reader: R, n: usize, k_max: usize) -> Result<SetFunctionSpec> {
    let mut table = HashMap::new();
    for rec in csv::Reader::from_reader(reader).records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let (Some(set), Some(value)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::Parse(format!("short row {rec:?}")));
        };
        let value: f64 = value.parse().map_err(|_| Error::Parse(format!("bad value {value:?}")))?;
        table.insert(set.parse::<ItemSet>()?, value);
    }
    SetFunctionSpec::tabular(n, k_max, table)
}

pub fn cmd_instance(target: &str, k: Option<usize>, tabular: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = parse_target(target, k).and_then(|t| {
        let mut buf = Vec::new();
        if tabular {
            let copy = tabulate(&t.spec, t.k)?;
            serde_json::to_writer_pretty(&mut buf, &copy).map_err(|e| Error::Parse(e.to_string()))?;
            buf.push(b'\n');
        } else {
            write_instance_csv(&instance_rows(&t.spec, t.k)?, &mut buf)?;
        }
        Ok(buf)
    });
    match result {
        Ok(bytes) => {
            let _ = out.write_all(&bytes);
            EXIT_OK
        }
        Err(e) => fail(err, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cmd(f: impl FnOnce(&mut dyn Write, &mut dyn Write) -> i32) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = f(&mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bounds_text_and_json() {
        let (code, text, _) = run_cmd(|o, e| cmd_bounds(15, 4, 100.0, None, false, o, e));
        assert_eq!(code, 0);
        assert!(text.contains("i_star      3") && text.contains("l           1"));
        let (code, text, _) = run_cmd(|o, e| cmd_bounds(4, 2, 1e4, None, true, o, e));
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["theorem1_value"].is_null());
        assert!(v["theorem2_value"].as_f64().unwrap() > 0.0);
        let (code, _, err) = run_cmd(|o, e| cmd_bounds(3, 5, 1e4, None, false, o, e));
        assert_eq!(code, EXIT_INPUT);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn instance_counts_and_roundtrip() {
        let (code, text, _) = run_cmd(|o, e| cmd_instance("harmonic:4:2", None, false, o, e));
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 1 + 10);
        let back = read_instance_csv(text.as_bytes(), 4, 2).unwrap();
        let orig = parse_target("harmonic:4:2", None).unwrap().spec;
        for s in subsets_up_to(4, 2) {
            assert_eq!(back.evaluate(s).unwrap(), orig.evaluate(s).unwrap());
        }
        let (_, cover, _) = run_cmd(|o, e| cmd_instance("cover", Some(1), false, o, e));
        assert!(cover.lines().any(|l| l == "14,5.9999999999999998e-1"));
    }

    #[test]
    fn resource_guard_exit_code() {
        assert_eq!(exit_code(&Error::GroundSetTooLarge { n: 30, max: 24 }), EXIT_RESOURCE);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_INPUT);
        let (code, _, _) = run_cmd(|o, e| cmd_verify("harmonic:30:2", None, false, o, e));
        assert_eq!(code, EXIT_RESOURCE);
    }
}
