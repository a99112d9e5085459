use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::set_function::table::ValueTable;
use crate::set_function::{
    approx_ratio, benchmark_on, curvature_on, exact_greedy, min_chain_cost_by_enumeration, monotone_on, opt_on,
    submodular_on, BestExtension, GreedyChain, SetFunctionSpec, DEFAULT_PATH_PENALTY, INEQUALITY_TOL,
    STRUCTURAL_TOL,
};

/// Ordered chains beyond this count are not enumerated.
pub const ENUMERATION_LIMIT: f64 = 5e7;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyTarget {
    pub name: String,
    pub spec: SetFunctionSpec,
    pub k: usize,
}

fn parse_num<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse(format!("bad {what} {field:?}")))
}

/// Builtin names are `cover`, `harmonic:N:K[:DELTA]`, `elevated:N:K[:DELTA]`
/// and `ugp:N:K[:DELTA]`; anything else is read as a JSON spec file.
/// Harmonic gaps default to `1/(8K^2)`, the path penalty to 0.01. The
/// elevated builtin lifts the chain `K, K+1, .., 2K-1`.
pub fn parse_target(text: &str, k: Option<usize>) -> Result<VerifyTarget> {
    let parts: Vec<&str> = text.split(':').collect();
    let sized = |parts: &[&str]| -> Result<(usize, usize, Option<f64>)> {
        if parts.len() < 3 || parts.len() > 4 {
            return Err(Error::Parse(format!("expected {}:N:K[:DELTA], got {text:?}", parts[0])));
        }
        let n = parse_num(parts[1], "n")?;
        let k = parse_num(parts[2], "k")?;
        let delta = parts.get(3).map(|d| parse_num(d, "delta")).transpose()?;
        Ok((n, k, delta))
    };
    let (spec, default_k) = match parts[0] {
        "cover" if parts.len() == 1 => (SetFunctionSpec::experiment_cover(), 4),
        "harmonic" => {
            let (n, k, d) = sized(&parts)?;
            (SetFunctionSpec::harmonic_base(n, k, d.unwrap_or(1.0 / (8 * k * k) as f64))?, k)
        }
        "elevated" => {
            let (n, k, d) = sized(&parts)?;
            if n < 2 * k {
                return Err(Error::Parse(format!("elevated builtin needs n >= 2k, got n={n}, k={k}")));
            }
            let tail = (k..2 * k).collect();
            (SetFunctionSpec::harmonic_elevated(n, k, d.unwrap_or(1.0 / (8 * k * k) as f64), 0, tail)?, k)
        }
        "ugp" => {
            let (n, k, d) = sized(&parts)?;
            (SetFunctionSpec::unique_greedy_path(n, k, d.unwrap_or(DEFAULT_PATH_PENALTY))?, k)
        }
        _ => {
            let path = Path::new(text);
            let json = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{text}: {e}")))?;
            let spec: SetFunctionSpec =
                serde_json::from_str(&json).map_err(|e| Error::Parse(format!("{text}: {e}")))?;
            let k = spec.max_cardinality().min(spec.n());
            (spec, k)
        }
    };
    Ok(VerifyTarget { name: text.to_string(), k: k.unwrap_or(default_k), spec })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub property: String,
    /// `None` when the check was skipped.
    pub ok: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub target: String,
    pub n: usize,
    pub k: usize,
    pub passed: bool,
    pub rows: Vec<PropertyRow>,
}

impl VerifyReport {
    pub fn row(&self, property: &str) -> Option<&PropertyRow> {
        self.rows.iter().find(|r| r.property == property)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("target {} (n = {}, k = {})\n", self.target, self.n, self.k);
        for r in &self.rows {
            let status = match r.ok {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "skip",
            };
            out += &format!("  {:<12} {:<5} {}\n", r.property, status, r.detail);
        }
        out += if self.passed { "all checks passed\n" } else { "some checks failed\n" };
        out
    }
}

fn row(property: &str, ok: Option<bool>, detail: String) -> PropertyRow {
    PropertyRow { property: property.into(), ok, detail }
}

fn ordered_chains(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// Monotonicity, submodularity, curvature range, the curvature bound on the
/// exact greedy chain, and DP-versus-enumeration agreement for the
/// robust-greedy benchmark.
pub fn verify(target: &VerifyTarget) -> Result<VerifyReport> {
    let spec = &target.spec;
    let k = target.k;
    if k > spec.n() {
        return Err(Error::Parse(format!("k = {k} exceeds n = {}", spec.n())));
    }
    let table = ValueTable::build(spec, k)?;
    let mut rows = Vec::new();

    let mono = monotone_on(&table);
    rows.push(match mono.witness {
        None => row("monotone", Some(true), String::new()),
        Some((a, x)) => row(
            "monotone",
            Some(false),
            format!(
                "f({{{a}}}) = {} > f({{{}}}) = {}",
                table.get(a),
                a.with(x),
                table.get(a.with(x))
            ),
        ),
    });

    let sub = submodular_on(&table);
    rows.push(match sub.witness {
        None => row("submodular", Some(true), String::new()),
        Some((a, b, x)) => {
            let gain = |s: crate::set_function::ItemSet| table.get(s.with(x)) - table.get(s);
            row(
                "submodular",
                Some(false),
                format!(
                    "A = {{{a}}}, B = {{{b}}}, item {x}: gain at A = {}, gain at B = {}",
                    gain(a),
                    gain(b)
                ),
            )
        }
    });

    let c = curvature_on(&table);
    let in_range = (-STRUCTURAL_TOL..=1.0 + STRUCTURAL_TOL).contains(&c);
    rows.push(row("curvature", Some(in_range), format!("c = {c}")));

    let greedy = exact_greedy(spec, k)?;
    let (_, f_star) = opt_on(&table);
    let rhs = approx_ratio(c) * f_star;
    let lhs = greedy.cost(spec)?;
    rows.push(row(
        "lemma1",
        Some(lhs >= rhs - INEQUALITY_TOL),
        format!("greedy {{{}}}: f + sum eps = {lhs} vs alpha * f* = {rhs}", greedy.final_set()),
    ));

    let ext = BestExtension::new(&table);
    let (b, levels) = benchmark_on(&table, &ext, k);
    let witness = GreedyChain::from_levels(spec, levels)?;
    let witness_cost = witness.cost(spec)?;
    let chains = ordered_chains(spec.n(), k);
    rows.push(if chains > ENUMERATION_LIMIT {
        row("benchmark", None, format!("B = {b}; {chains:.3e} ordered chains, enumeration skipped"))
    } else {
        let (enumerated, visited) = min_chain_cost_by_enumeration(spec, k)?;
        row(
            "benchmark",
            Some(enumerated == b && witness_cost == b),
            format!("B = {b}, enumeration over {visited} chains = {enumerated}, witness cost = {witness_cost}"),
        )
    });

    let passed = rows.iter().all(|r| r.ok != Some(false));
    Ok(VerifyReport { target: target.name.clone(), n: spec.n(), k, passed, rows })
}
