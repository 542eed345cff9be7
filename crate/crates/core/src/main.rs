use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lfcomp::harness::{
    parse_kinds, parse_seeds, run_experiment, validate_kernels, write_csv, write_kernel_csv,
    Experiment, ExperimentPlan,
};
use lfcomp::mcval::McSpec;
use lfcomp::scenario::ScenarioConfig;
use lfcomp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lfcomp",
    version,
    about = "Limited-feedback CoMP link kernels and greedy resource allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file applied over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base parameter set.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// Seeds as `a..b` (half-open), `a..=b` or a single number.
    #[arg(long, default_value = "0..1")]
    seeds: String,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the analytic link kernels with Monte-Carlo on the reference link.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Monte-Carlo trials per power level.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Solve one placed cluster per seed.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Utility kinds: comma-separated list of wsc|wsec|wsee|wseee, or `all`.
        #[arg(long)]
        kind: Option<String>,
        /// Record wall-clock time per row.
        #[arg(long)]
        timing: bool,
    },
    /// Run a named experiment sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// convergence, d-sweep, btot-sweep, power-sweep, antenna-sweep,
        /// subcarrier-sweep, cluster-sweep or tiny-oracle.
        #[arg(long)]
        experiment: String,
        /// Utility kinds: comma-separated list of wsc|wsec|wsee|wseee, or `all`.
        #[arg(long)]
        kind: Option<String>,
        /// Comma-separated sweep values overriding the experiment defaults.
        #[arg(long)]
        values: Option<String>,
        /// Record wall-clock time per row.
        #[arg(long)]
        timing: bool,
    },
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let base = ScenarioConfig::preset(&common.preset)?;
    let cfg = match &common.config {
        Some(path) => ScenarioConfig::parse_over(&std::fs::read_to_string(path)?, base)?,
        None => base,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad sweep value '{v}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate { common, trials } => {
            let cfg = load_config(&common)?;
            let seed = *parse_seeds(&common.seeds)?.first().expect("nonempty");
            let report = validate_kernels(&cfg, &McSpec::new(trials, seed))?;
            write_kernel_csv(&report.rows, output(&common.out)?)?;
            for c in &report.checks {
                eprintln!("{c}");
            }
            Ok(report.passed())
        }
        Command::Solve {
            common,
            kind,
            timing,
        } => {
            let cfg = load_config(&common)?;
            let kinds = match kind {
                Some(k) => parse_kinds(&k)?,
                None => vec![cfg.utility_kind],
            };
            let plan = ExperimentPlan {
                experiment: Experiment::DSweep,
                values: vec![cfg.bs_ring_radius_m],
                seeds: parse_seeds(&common.seeds)?,
                kinds,
                timing,
            };
            let mut rows = run_experiment(&plan, &cfg)?.rows;
            // A single-point distance sweep at the configured ring radius.
            for r in &mut rows {
                r.experiment = "solve";
            }
            write_csv(&rows, output(&common.out)?)?;
            Ok(true)
        }
        Command::Sweep {
            common,
            experiment,
            kind,
            values,
            timing,
        } => {
            let cfg = load_config(&common)?;
            let experiment: Experiment = experiment.parse()?;
            if experiment == Experiment::ValidateKernels {
                return Err(Error::Usage(
                    "validate-kernels is run by the validate subcommand".into(),
                ));
            }
            let kinds = match kind {
                Some(k) => parse_kinds(&k)?,
                None => vec![cfg.utility_kind],
            };
            let mut plan =
                ExperimentPlan::new(experiment, &cfg, parse_seeds(&common.seeds)?, kinds);
            if let Some(v) = values {
                plan.values = parse_values(&v)?;
            }
            plan.timing = timing;
            let out = run_experiment(&plan, &cfg)?;
            write_csv(&out.rows, output(&common.out)?)?;
            for c in &out.checks {
                eprintln!("{c}");
            }
            Ok(out.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
