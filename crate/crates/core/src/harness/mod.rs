//! Seeded experiment sweeps, their embedded sanity checks and CSV output.

mod kernels_report;

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::allocator::{exhaustive_optimum, solve_wsu, Solution, SolveOptions, Strategy};
use crate::kernels::UtilityKind;
use crate::scenario::{place_network, PerEntity, ScenarioConfig};
use crate::{Error, Result};

pub use kernels_report::{
    reference_link, validate_kernels, write_kernel_csv, KernelReport, KernelRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    ValidateKernels,
    Convergence,
    DSweep,
    BtotSweep,
    PowerSweep,
    AntennaSweep,
    SubcarrierSweep,
    ClusterSweep,
    TinyOracle,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::ValidateKernels,
        Experiment::Convergence,
        Experiment::DSweep,
        Experiment::BtotSweep,
        Experiment::PowerSweep,
        Experiment::AntennaSweep,
        Experiment::SubcarrierSweep,
        Experiment::ClusterSweep,
        Experiment::TinyOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::ValidateKernels => "validate-kernels",
            Experiment::Convergence => "convergence",
            Experiment::DSweep => "d-sweep",
            Experiment::BtotSweep => "btot-sweep",
            Experiment::PowerSweep => "power-sweep",
            Experiment::AntennaSweep => "antenna-sweep",
            Experiment::SubcarrierSweep => "subcarrier-sweep",
            Experiment::ClusterSweep => "cluster-sweep",
            Experiment::TinyOracle => "tiny-oracle",
        }
    }

    /// Name of the swept parameter as written to the CSV.
    pub fn swept_param(self) -> &'static str {
        match self {
            Experiment::ValidateKernels => "power_w",
            Experiment::Convergence => "iteration",
            Experiment::DSweep => "bs_ring_radius_m",
            Experiment::BtotSweep => "feedback_budget",
            Experiment::PowerSweep => "per_bs_power_w",
            Experiment::AntennaSweep => "num_antennas",
            Experiment::SubcarrierSweep => "num_subcarriers",
            Experiment::ClusterSweep => "num_bs",
            Experiment::TinyOracle => "feedback_budget",
        }
    }

    /// Default sweep for a base configuration.
    pub fn default_values(self, base: &ScenarioConfig) -> Vec<f64> {
        match self {
            Experiment::ValidateKernels => vec![0.0, 0.1, 1.0, 10.0],
            Experiment::Convergence => vec![base.feedback_budget as f64],
            Experiment::DSweep => (0..=10)
                .map(|i| base.cluster_radius_m * i as f64 / 10.0)
                .collect(),
            Experiment::BtotSweep => [0.25, 0.5, 1.0]
                .iter()
                .map(|f| (base.feedback_budget as f64 * f).round())
                .collect(),
            Experiment::PowerSweep => vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
            Experiment::AntennaSweep => vec![4.0, 5.0, 6.0, 8.0],
            Experiment::SubcarrierSweep => vec![4.0, 8.0, 16.0],
            Experiment::ClusterSweep => (2..base.num_antennas.min(6)).map(|c| c as f64).collect(),
            Experiment::TinyOracle => vec![6.0],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown experiment '{s}'")))
    }
}

/// What to run: one row per (swept value, seed, kind).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub experiment: Experiment,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub kinds: Vec<UtilityKind>,
    /// Record wall-clock time per row; off by default so output is reproducible.
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn new(
        experiment: Experiment,
        base: &ScenarioConfig,
        seeds: Vec<u64>,
        kinds: Vec<UtilityKind>,
    ) -> Self {
        ExperimentPlan {
            experiment,
            values: experiment.default_values(base),
            seeds,
            kinds,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() || self.kinds.is_empty() {
            return Err(Error::Usage(
                "sweep values, seeds and utility kinds must be nonempty".into(),
            ));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: &'static str,
    pub kind: UtilityKind,
    pub seed: u64,
    pub swept_param: &'static str,
    pub swept_value: f64,
    pub lambda: f64,
    pub lambda_b0: f64,
    pub iterations: usize,
    pub wall_ms: Option<f64>,
    /// Experiment-specific columns, identical names on every row of a run.
    pub extras: Vec<(&'static str, f64)>,
}

/// Pass/fail outcome of a property checked over a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Rows plus the checks evaluated on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Parses `a..b` (half-open), `a..=b` or a single seed.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Usage(format!("bad seed range '{s}', expected a..b, a..=b or n"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        vec![num(s)?]
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// Parses a comma-separated list of utility kinds; `all` selects every kind.
pub fn parse_kinds(s: &str) -> Result<Vec<UtilityKind>> {
    if s.trim() == "all" {
        return Ok(UtilityKind::ALL.to_vec());
    }
    s.split(',').map(|k| k.trim().parse()).collect()
}

/// Configuration of one sweep point.
pub fn apply_sweep(
    experiment: Experiment,
    base: &ScenarioConfig,
    value: f64,
) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    let count = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Usage(format!(
                "{experiment} needs integral values, got {v}"
            )))
        }
    };
    match experiment {
        Experiment::ValidateKernels | Experiment::Convergence => {}
        Experiment::DSweep => cfg.bs_ring_radius_m = value,
        Experiment::BtotSweep => cfg.feedback_budget = count(value)? as u32,
        Experiment::PowerSweep => cfg.per_bs_power_w = PerEntity::All(value),
        Experiment::AntennaSweep => cfg.num_antennas = count(value)?,
        Experiment::SubcarrierSweep => cfg.num_subcarriers = count(value)?,
        Experiment::ClusterSweep => cfg.num_bs = count(value)?,
        Experiment::TinyOracle => {
            cfg = tiny_config(base);
            cfg.feedback_budget = count(value)? as u32;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Smallest cluster the exhaustive oracle can enumerate: 2 subcarriers,
/// 2 BSs, 4 UEs and 6 feedback bits.
pub fn tiny_config(base: &ScenarioConfig) -> ScenarioConfig {
    ScenarioConfig {
        num_bs: 2,
        num_ue: 4,
        num_subcarriers: 2,
        feedback_budget: 6,
        weights: None,
        ..base.clone()
    }
}

/// Places the cluster for `seed` and runs the full alternating solver.
pub fn solve_instance(
    cfg: &ScenarioConfig,
    seed: u64,
    kind: UtilityKind,
    strategy: Strategy,
) -> Result<Solution> {
    let topology = place_network(cfg, seed)?;
    let options = SolveOptions {
        kind,
        strategy,
        seed,
        ..SolveOptions::from_config(cfg)
    };
    solve_wsu(&topology, cfg, &options)
}

fn elapsed_ms(start: Instant, timing: bool) -> Option<f64> {
    timing.then(|| start.elapsed().as_secs_f64() * 1e3)
}

/// Runs every (value, seed, kind) cell of `plan` in a fixed order.
pub fn run_experiment(plan: &ExperimentPlan, base: &ScenarioConfig) -> Result<ExperimentOutput> {
    plan.validate()?;
    base.validate()?;
    let exp = plan.experiment;
    if exp == Experiment::ValidateKernels {
        return Err(Error::Usage(
            "validate-kernels has its own report; use the validate subcommand".into(),
        ));
    }
    let mut rows = Vec::new();
    for &value in &plan.values {
        let cfg = apply_sweep(exp, base, value)?;
        for &seed in &plan.seeds {
            for &kind in &plan.kinds {
                let start = Instant::now();
                match exp {
                    Experiment::Convergence => {
                        let sol = solve_instance(&cfg, seed, kind, Strategy::Opt)?;
                        let wall = elapsed_ms(start, plan.timing);
                        let l = &sol.ledger;
                        for (t, &lx) in l.lambda_x.iter().enumerate() {
                            rows.push(Row {
                                experiment: exp.as_str(),
                                kind,
                                seed,
                                swept_param: exp.swept_param(),
                                swept_value: (t + 1) as f64,
                                lambda: lx,
                                lambda_b0: l.lambda_b[0],
                                iterations: l.iterations(),
                                wall_ms: wall,
                                extras: vec![("lambda_B", l.lambda_b[t])],
                            });
                        }
                    }
                    Experiment::BtotSweep => {
                        let opt = solve_instance(&cfg, seed, kind, Strategy::Opt)?;
                        let min = solve_instance(&cfg, seed, kind, Strategy::Min)?;
                        let equ = solve_instance(&cfg, seed, kind, Strategy::Equ)?;
                        rows.push(Row {
                            experiment: exp.as_str(),
                            kind,
                            seed,
                            swept_param: exp.swept_param(),
                            swept_value: value,
                            lambda: opt.ledger.lambda,
                            lambda_b0: opt.ledger.lambda_b[0],
                            iterations: opt.ledger.iterations(),
                            wall_ms: elapsed_ms(start, plan.timing),
                            extras: vec![
                                ("lambda_opt", opt.ledger.lambda),
                                ("lambda_min", min.ledger.lambda),
                                ("lambda_equ", equ.ledger.lambda),
                            ],
                        });
                    }
                    Experiment::TinyOracle => {
                        let topology = place_network(&cfg, seed)?;
                        let options = SolveOptions {
                            kind,
                            seed,
                            ..SolveOptions::from_config(&cfg)
                        };
                        let sol = solve_wsu(&topology, &cfg, &options)?;
                        let oracle =
                            exhaustive_optimum(&topology, &cfg, cfg.feedback_budget, kind)?;
                        let ratio = if oracle.lambda > 0.0 {
                            sol.ledger.lambda / oracle.lambda
                        } else {
                            1.0
                        };
                        rows.push(Row {
                            experiment: exp.as_str(),
                            kind,
                            seed,
                            swept_param: exp.swept_param(),
                            swept_value: value,
                            lambda: sol.ledger.lambda,
                            lambda_b0: sol.ledger.lambda_b[0],
                            iterations: sol.ledger.iterations(),
                            wall_ms: elapsed_ms(start, plan.timing),
                            extras: vec![("lambda_star", oracle.lambda), ("ratio", ratio)],
                        });
                    }
                    _ => {
                        let sol = solve_instance(&cfg, seed, kind, Strategy::Opt)?;
                        rows.push(Row {
                            experiment: exp.as_str(),
                            kind,
                            seed,
                            swept_param: exp.swept_param(),
                            swept_value: value,
                            lambda: sol.ledger.lambda,
                            lambda_b0: sol.ledger.lambda_b[0],
                            iterations: sol.ledger.iterations(),
                            wall_ms: elapsed_ms(start, plan.timing),
                            extras: Vec::new(),
                        });
                    }
                }
            }
        }
    }
    let checks = check_rows(plan, &rows);
    Ok(ExperimentOutput { rows, checks })
}

/// Seed-averaged λ per swept value, in sweep order.
pub fn mean_by_value(rows: &[Row], kind: UtilityKind, values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let sel: Vec<f64> = rows
                .iter()
                .filter(|r| r.kind == kind && r.swept_value == v)
                .map(|r| r.lambda)
                .collect();
            sel.iter().sum::<f64>() / sel.len().max(1) as f64
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn extra(row: &Row, name: &str) -> f64 {
    row.extras
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, v)| *v)
        .unwrap_or(f64::NAN)
}

/// Trend checks embedded in each experiment.
pub fn check_rows(plan: &ExperimentPlan, rows: &[Row]) -> Vec<Check> {
    let mut checks = Vec::new();
    let values = &plan.values;
    for &kind in &plan.kinds {
        let of_kind: Vec<&Row> = rows.iter().filter(|r| r.kind == kind).collect();
        match plan.experiment {
            Experiment::Convergence => {
                for &seed in &plan.seeds {
                    let lam: Vec<f64> = of_kind
                        .iter()
                        .filter(|r| r.seed == seed)
                        .map(|r| r.lambda)
                        .collect();
                    let ok = lam.windows(2).all(|w| w[1] >= w[0] - 1e-9);
                    checks.push(Check {
                        name: format!("convergence {kind} seed {seed}: lambda nondecreasing"),
                        passed: ok,
                        detail: format!("{lam:?}"),
                    });
                }
            }
            Experiment::DSweep if values.len() >= 3 => {
                let means = mean_by_value(rows, kind, values);
                let i = argmax(&means);
                checks.push(Check {
                    name: format!("d-sweep {kind}: interior argmax"),
                    passed: i > 0 && i + 1 < values.len(),
                    detail: format!("argmax at {} of {values:?}", values[i]),
                });
            }
            Experiment::BtotSweep => {
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let at_top: Vec<&&Row> = of_kind.iter().filter(|r| r.swept_value == top).collect();
                for other in ["lambda_equ", "lambda_min"] {
                    let wins = at_top
                        .iter()
                        .filter(|r| extra(r, "lambda_opt") >= extra(r, other) - 1e-12)
                        .count();
                    let frac = wins as f64 / at_top.len().max(1) as f64;
                    checks.push(Check {
                        name: format!("btot-sweep {kind}: opt >= {} in 90% of seeds", &other[7..]),
                        passed: frac >= 0.9,
                        detail: format!("{wins}/{} at B_tot={top}", at_top.len()),
                    });
                }
            }
            Experiment::PowerSweep if values.len() >= 3 => {
                let means = mean_by_value(rows, kind, values);
                let (name, ok) = match kind {
                    UtilityKind::Wsee | UtilityKind::Wseee => {
                        let i = argmax(&means);
                        ("interior argmax", i > 0 && i + 1 < values.len())
                    }
                    _ => (
                        "nondecreasing",
                        means.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)),
                    ),
                };
                checks.push(Check {
                    name: format!("power-sweep {kind}: {name}"),
                    passed: ok,
                    detail: format!("{means:?}"),
                });
            }
            Experiment::TinyOracle => {
                let bounded = of_kind
                    .iter()
                    .all(|r| r.lambda <= extra(r, "lambda_star") * (1.0 + 1e-9) + 1e-12);
                let mean_ratio = of_kind.iter().map(|r| extra(r, "ratio")).sum::<f64>()
                    / of_kind.len().max(1) as f64;
                checks.push(Check {
                    name: format!("tiny-oracle {kind}: heuristic <= optimum"),
                    passed: bounded,
                    detail: format!("{} instances", of_kind.len()),
                });
                checks.push(Check {
                    name: format!("tiny-oracle {kind}: mean ratio >= 0.85"),
                    passed: mean_ratio >= 0.85,
                    detail: format!("{mean_ratio:.4}"),
                });
            }
            _ => {}
        }
    }
    checks
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes rows as CSV with a header; extra columns come from the first row.
pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "experiment",
        "kind",
        "seed",
        "swept_param",
        "swept_value",
        "lambda",
        "lambda_B0",
        "iterations",
        "wall_ms",
    ];
    if let Some(first) = rows.first() {
        header.extend(first.extras.iter().map(|(n, _)| *n));
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.experiment.to_string(),
            r.kind.as_str().to_string(),
            r.seed.to_string(),
            r.swept_param.to_string(),
            fmt_f64(r.swept_value),
            fmt_f64(r.lambda),
            fmt_f64(r.lambda_b0),
            r.iterations.to_string(),
            r.wall_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ];
        rec.extend(r.extras.iter().map(|(_, v)| fmt_f64(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
