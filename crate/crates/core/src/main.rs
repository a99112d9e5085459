use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sublab::experiment::{cmd_bounds, cmd_instance, cmd_plot, cmd_run, cmd_verify};

#[derive(Parser)]
#[command(name = "sublab", version, about = "Bandit experiments over monotone submodular set functions")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for trial-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (policy, T, trial) cell of an experiment config.
    Run { config: PathBuf },
    /// Check monotonicity, submodularity, curvature and the benchmark oracles.
    ///
    /// TARGET is `cover`, `harmonic:N:K[:DELTA]`, `elevated:N:K[:DELTA]`,
    /// `ugp:N:K[:DELTA]`, or a path to a set-function JSON file.
    Verify {
        target: String,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Print i*, both bound values and the default sample budget.
    Bounds {
        n: usize,
        k: usize,
        #[arg(value_name = "T")]
        horizon: f64,
        #[arg(long)]
        l: Option<usize>,
    },
    /// Render mean regret versus T from a results.csv.
    Plot {
        results: PathBuf,
        /// Defaults to regret.svg in --out, or next to the CSV.
        svg: Option<PathBuf>,
    },
    /// Dump every set of size at most k with its value.
    Instance {
        target: String,
        #[arg(long)]
        k: Option<usize>,
        /// Emit a tabular JSON spec instead of CSV.
        #[arg(long)]
        tabular: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Run { config } => cmd_run(&config, cli.out.as_deref(), cli.jobs, cli.json, &mut out, &mut err),
        Command::Verify { target, k } => cmd_verify(&target, k, cli.json, &mut out, &mut err),
        Command::Bounds { n, k, horizon, l } => cmd_bounds(n, k, horizon, l, cli.json, &mut out, &mut err),
        Command::Plot { results, svg } => {
            let svg = svg.unwrap_or_else(|| {
                let dir = cli.out.clone().or_else(|| results.parent().map(PathBuf::from)).unwrap_or_default();
                dir.join("regret.svg")
            });
            cmd_plot(&results, &svg, &mut out, &mut err)
        }
        Command::Instance { target, k, tabular } => cmd_instance(&target, k, tabular, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
