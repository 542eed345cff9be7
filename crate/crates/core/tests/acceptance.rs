//! Acceptance criteria. Each test prints one `criterion <id>: PASS|FAIL`
//! line (written straight to stdout so it shows even when output is
//! captured) and then asserts the criterion.

use std::fmt::Display;
use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lfcomp::allocator::{
    c_bsa, check_constraints, gfbp, random_schedule, Network, ProcessingSnapshot, Strategy,
};
use lfcomp::channel::sample_qca_error;
use lfcomp::harness::{
    reference_link, run_experiment, solve_instance, validate_kernels, Experiment, ExperimentPlan,
    KernelReport,
};
use lfcomp::kernels::quad::adaptive_quad;
use lfcomp::kernels::{
    capacity_r1, eff_capacity_r3, eff_capacity_r4, link_utility, o_func_derivative, LinkContext,
    LinkEnergy, QcaDensity, QuadratureSpec, UtilityKind,
};
use lfcomp::mcval::{mc_z_model_capacity, McSpec};
use lfcomp::scenario::{place_network, ScenarioConfig};

fn report(id: &str, passed: bool, detail: impl Display) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id}: {tag} — {detail}").unwrap();
    out.flush().unwrap();
    assert!(passed, "criterion {id} failed: {detail}");
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_01a_qca_density_normalized() {
    let tight = QuadratureSpec {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_subdivisions: 200,
    };
    let mut worst: f64 = 0.0;
    for bits in 0..=20 {
        for n_t in 3..=16 {
            let q = QcaDensity::new(bits, n_t).unwrap();
            let mass = adaptive_quad(|x| q.pdf(x), 0.0, q.delta, &tight).unwrap();
            worst = worst.max((mass - 1.0).abs());
        }
    }
    report(
        "1a (density integrates to 1 ± 1e-9)",
        worst <= 1e-9,
        format!("max |mass - 1| = {worst:.2e} over B 0..20, N_t 3..16"),
    );
}

#[test]
fn criterion_01b_qca_sampler_matches_cdf() {
    let mut worst: f64 = 0.0;
    for (bits, n_t) in [(8, 5), (0, 3), (4, 8), (20, 16), (12, 4)] {
        let q = QcaDensity::new(bits, n_t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(bits as u64 * 100 + n_t as u64);
        let mut xs: Vec<f64> = (0..100_000)
            .map(|_| sample_qca_error(bits, n_t, &mut rng).unwrap())
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = q.cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        worst = worst.max(ks);
    }
    report(
        "1b (sampler Kolmogorov distance <= 0.01)",
        worst <= 0.01,
        format!("max KS distance {worst:.4} at 1e5 draws"),
    );
}

// ---------------------------------------------------------------- 2

fn kernel_report() -> &'static KernelReport {
    static REPORT: OnceLock<KernelReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        validate_kernels(&ScenarioConfig::desk(), &McSpec::new(100_000, 1)).unwrap()
    })
}

fn kernel_checks(id: &str, prefix: &str) {
    let checks: Vec<_> = kernel_report()
        .checks
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .collect();
    assert!(!checks.is_empty());
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("[{}: {}]", c.name, c.detail))
        .collect();
    let detail = if failed.is_empty() {
        format!("{} checks passed", checks.len())
    } else {
        format!(
            "{}/{} failed {}",
            failed.len(),
            checks.len(),
            failed.join(" ")
        )
    };
    report(id, failed.is_empty(), detail);
}

#[test]
fn criterion_02a_r1_within_10_percent_of_mc() {
    kernel_checks("2a (capacity r1 vs MC, 10%)", "r1 within");
}

#[test]
fn criterion_02b_r2_within_15_percent_of_mc() {
    kernel_checks("2b (capacity r2 vs MC, 15%)", "r2 within");
}

#[test]
fn criterion_02c_r3_within_10_percent_of_mc() {
    kernel_checks("2c (effective capacity r3 vs MC, 10%)", "r3 within");
}

#[test]
fn criterion_02d_r4_within_15_percent_inside_window() {
    kernel_checks(
        "2d (effective capacity r4 vs MC in window, 15%)",
        "r4 within",
    );
}

// ---------------------------------------------------------------- 3

fn richardson(f: impl Fn(f64) -> f64, z: f64, order: usize, h: f64) -> f64 {
    let fd = |h: f64| {
        let mut s = 0.0;
        let mut binom = 1.0;
        for k in 0..=order {
            let x = z + (order as f64 / 2.0 - k as f64) * h;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * f(x);
            binom = binom * (order - k) as f64 / (k as f64 + 1.0);
        }
        s / h.powi(order as i32)
    };
    let (d1, d2, d4) = (fd(h), fd(h / 2.0), fd(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

#[test]
fn criterion_03_derivative_matches_finite_differences() {
    let zs = [0.1, 0.5, 1.0, 2.0, 4.0];
    let alpha_sets: [&[f64]; 4] = [&[0.3], &[0.2, 1.5], &[0.5, 2.0, 3.5], &[1.0, 0.05]];
    let betas = [0.1, 0.5, 1.0, 2.0, 5.0];
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for &z in &zs {
        for alphas in alpha_sets {
            for &beta in &betas {
                points += 1;
                // natural length scale of O around z
                let scale = alphas
                    .iter()
                    .map(|a| (1.0 + a * z) / a)
                    .fold(1.0 / beta, f64::min);
                let h = 0.05 * scale;
                // A sixth-order difference of O itself loses most digits to
                // cancellation, so order n is checked against the Richardson
                // first difference of order n-1; order 0 is the closed form,
                // so every order is pinned down by induction.
                for order in 1..=6 {
                    let exact = o_func_derivative(z, order, alphas, beta);
                    let fd = richardson(|x| o_func_derivative(x, order - 1, alphas, beta), z, 1, h);
                    worst = worst.max(((exact - fd) / exact).abs());
                }
            }
        }
    }
    report(
        "3 (derivative vs Richardson, 1e-5)",
        points == 100 && worst <= 1e-5,
        format!("{points} grid points × orders 1-6, max relative error {worst:.2e}"),
    );
}

// ---------------------------------------------------------------- 4

const POWERS: [f64; 3] = [0.1, 1.0, 10.0];
const THETAS: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

#[test]
fn criterion_04a_small_theta_r3_matches_capacity() {
    let mut worst: f64 = 0.0;
    for p in POWERS {
        let ctx = reference_link(p, 1e-4).unwrap();
        let ec = eff_capacity_r3(&ctx, &spec()).unwrap();
        let cap = mc_z_model_capacity(&ctx, &McSpec::new(100_000, 3))
            .unwrap()
            .mean;
        worst = worst.max((ec - cap).abs() / cap);
    }
    report(
        "4a (r3 at theta=1e-4 within 1% of capacity of the same signal model)",
        worst <= 0.01,
        format!("max relative gap {:.3}%", 100.0 * worst),
    );
}

#[test]
fn criterion_04b_small_theta_r4_matches_capacity() {
    let mut worst: f64 = 0.0;
    for p in POWERS {
        let ctx = reference_link(p, 1e-4).unwrap();
        let ec = eff_capacity_r4(&ctx, &spec()).unwrap();
        let cap = capacity_r1(&ctx, &spec()).unwrap();
        worst = worst.max((ec - cap).abs() / cap);
    }
    report(
        "4b (r4 at theta=1e-4 within 1% of capacity r1)",
        worst <= 0.01,
        format!("max relative gap {:.3}%", 100.0 * worst),
    );
}

fn monotone_in_theta(f: impl Fn(&LinkContext) -> f64) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in POWERS {
        let values: Vec<f64> = THETAS
            .iter()
            .map(|&t| f(&reference_link(p, t).unwrap()))
            .collect();
        let mono = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
        if !mono {
            ok = false;
            detail.push(format!("P={p}: {values:.4?}"));
        }
    }
    let detail = if ok {
        "nonincreasing on theta 0.1..10 at P 0.1/1/10".to_string()
    } else {
        detail.join("; ")
    };
    (ok, detail)
}

#[test]
fn criterion_04c_r3_nonincreasing_in_theta() {
    let (ok, detail) = monotone_in_theta(|c| eff_capacity_r3(c, &spec()).unwrap());
    report("4c (r3 monotone in theta)", ok, detail);
}

#[test]
fn criterion_04d_r4_nonincreasing_in_theta() {
    let (ok, detail) = monotone_in_theta(|c| eff_capacity_r4(c, &spec()).unwrap());
    report("4d (r4 monotone in theta)", ok, detail);
}

fn random_ctx(rng: &mut ChaCha8Rng, kind: UtilityKind) -> LinkContext {
    let n_t = rng.random_range(3..=8usize);
    let active = rng.random_range(1..n_t);
    let gain = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-14.0..-8.0));
    LinkContext {
        rho_own: gain(rng),
        rho_int: (1..active).map(|_| gain(rng)).collect(),
        power_own: rng.random_range(0.0..20.0),
        power_int: (1..active).map(|_| rng.random_range(0.0..20.0)).collect(),
        sigma2: 10f64.powf(rng.random_range(-13.0..-9.0)),
        n_t,
        active_count: active,
        bit_split: (0..active).map(|_| rng.random_range(0..16)).collect(),
        theta: rng.random_range(0.1..5.0),
        energy: LinkEnergy {
            processing_w: rng.random_range(0.0..1.0),
            tau: rng.random_range(0.0..1.0),
            zeta: rng.random_range(0.01..1.0),
        },
        kind,
    }
}

#[test]
fn criterion_04e_energy_efficiency_below_inverse_zeta() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut violations = 0;
    let mut closest: f64 = 0.0;
    for i in 0..1000 {
        let kind = if i % 2 == 0 {
            UtilityKind::Wsee
        } else {
            UtilityKind::Wseee
        };
        let ctx = random_ctx(&mut rng, kind);
        let ee = link_utility(&ctx, &spec()).unwrap();
        let bound = 1.0 / ctx.energy.zeta;
        if ee.is_nan() || ee >= bound {
            violations += 1;
        }
        closest = closest.max(ee / bound);
    }
    report(
        "4e (EE < 1/zeta on 1000 random links)",
        violations == 0,
        format!("{violations} violations, max EE·zeta = {closest:.4}"),
    );
}

// ---------------------------------------------------------------- 5, 6

struct InstanceAudit {
    instances: usize,
    constraint_failures: Vec<String>,
    /// Largest trace drop and where it happened, per utility kind.
    worst: Vec<(UtilityKind, f64, String)>,
    traces: usize,
}

fn instance_audit() -> &'static InstanceAudit {
    static AUDIT: OnceLock<InstanceAudit> = OnceLock::new();
    AUDIT.get_or_init(|| {
        let cfg = ScenarioConfig::desk();
        let budget = cfg.feedback_budget;
        let mut audit = InstanceAudit {
            instances: 0,
            constraint_failures: Vec::new(),
            worst: UtilityKind::ALL
                .iter()
                .map(|&k| (k, 0.0, String::new()))
                .collect(),
            traces: 0,
        };
        let audit_trace = |t: &[f64], label: String, audit: &mut InstanceAudit| {
            audit.traces += 1;
            let kind = UtilityKind::ALL
                .iter()
                .position(|k| label.contains(&format!(" {k} ")))
                .expect("label names its kind");
            let slot = &mut audit.worst[kind];
            for w in t.windows(2) {
                let drop = w[0] - w[1];
                if drop > slot.1 {
                    slot.1 = drop;
                    slot.2 = label.clone();
                }
            }
        };
        for seed in 0..50u64 {
            let topology = place_network(&cfg, seed).unwrap();
            let state = random_schedule(&topology, cfg.num_subcarriers, seed);
            for kind in UtilityKind::ALL {
                audit.instances += 1;
                let net = Network::new(&topology, &cfg, kind, Strategy::Opt);
                let fbp = gfbp(&net, &state, budget, cfg.iota).unwrap();
                let r = check_constraints(&topology, &state, &fbp.plan, budget as u64);
                if !r.is_ok() {
                    audit
                        .constraint_failures
                        .push(format!("seed {seed} {kind} gfbp: {r}"));
                }
                audit_trace(&fbp.trace, format!("seed {seed} {kind} gfbp"), &mut audit);
                for (n, t) in fbp.cluster_traces.iter().enumerate() {
                    audit_trace(t, format!("seed {seed} {kind} c_ifbp n={n}"), &mut audit);
                }
                let bsa = c_bsa(&net, &state, &fbp.plan).unwrap();
                let r = check_constraints(&topology, &bsa.state, &bsa.plan, budget as u64);
                if !r.is_ok() {
                    audit
                        .constraint_failures
                        .push(format!("seed {seed} {kind} c_bsa: {r}"));
                }
                for (n, t) in bsa.traces.iter().enumerate() {
                    audit_trace(t, format!("seed {seed} {kind} c_bsa n={n}"), &mut audit);
                }
                // per-UE splits of the final allocation
                let snapshot = ProcessingSnapshot::new(&cfg, &bsa.state);
                for n in 0..cfg.num_subcarriers {
                    let links = bsa.state.links(&topology, n);
                    let active: Vec<usize> = links.iter().map(|&(c, _)| c).collect();
                    for &(c, u) in &links {
                        let b: u32 = active.iter().map(|&a| bsa.plan.splits[n][u][a]).sum();
                        let s = net.ue_split(u, c, &active, b, &snapshot).unwrap();
                        audit_trace(
                            &s.trace,
                            format!("seed {seed} {kind} u_ifbp ue={u} n={n}"),
                            &mut audit,
                        );
                    }
                }
            }
        }
        audit
    })
}

#[test]
fn criterion_05_constraints_hold_after_gfbp_and_cbsa() {
    let a = instance_audit();
    report(
        "5 (constraints after gfbp and c_bsa)",
        a.instances == 200 && a.constraint_failures.is_empty(),
        format!(
            "{} instances (50 seeds × 4 kinds), {} failures {:?}",
            a.instances,
            a.constraint_failures.len(),
            a.constraint_failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_06_greedy_traces_nondecreasing() {
    let a = instance_audit();
    let per_kind: Vec<String> = a
        .worst
        .iter()
        .map(|(k, drop, at)| {
            if *drop > 0.0 {
                format!("{k}: {drop:.3e} ({at})")
            } else {
                format!("{k}: none")
            }
        })
        .collect();
    report(
        "6 (greedy traces nondecreasing within 1e-9)",
        a.worst.iter().all(|w| w.1 <= 1e-9),
        format!(
            "{} traces audited, largest drop per kind: {}",
            a.traces,
            per_kind.join("; ")
        ),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_convergence() {
    let cfg = ScenarioConfig::desk();
    let mut fast = 0;
    let mut gains = 0;
    let mut ratios = Vec::new();
    for seed in seeds(20) {
        let sol = solve_instance(&cfg, seed, UtilityKind::Wsc, Strategy::Opt).unwrap();
        let l = &sol.ledger;
        if l.iterations() <= 5 {
            fast += 1;
        }
        if l.lambda_x[0] > l.lambda_b[0] {
            gains += 1;
        }
        ratios.push(l.lambda_x[0] / l.lambda_b[0]);
    }
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    report(
        "7 (<= 5 iterations on >= 18/20 seeds, lambda_X[1] > lambda_B[0] on 20/20)",
        fast >= 18 && gains == 20,
        format!("{fast}/20 converged within 5, {gains}/20 improved, mean lambda_X[1]/lambda_B[0] = {mean_ratio:.2}"),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_tiny_instances_against_exhaustive_optimum() {
    let base = ScenarioConfig::desk();
    let plan = ExperimentPlan::new(
        Experiment::TinyOracle,
        &base,
        seeds(20),
        vec![UtilityKind::Wsc],
    );
    let out = run_experiment(&plan, &base).unwrap();
    let ratios: Vec<f64> = out
        .rows
        .iter()
        .map(|r| r.extras.iter().find(|(n, _)| *n == "ratio").unwrap().1)
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    report(
        "8 (heuristic <= optimum always, mean ratio >= 0.85)",
        out.passed() && out.rows.len() == 20,
        format!(
            "20 instances, mean ratio {mean:.4}, min ratio {min:.4}, max ratio {:.6}",
            ratios.iter().copied().fold(0.0, f64::max)
        ),
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_optimized_partition_beats_baselines() {
    let base = ScenarioConfig::desk();
    let mut plan = ExperimentPlan::new(
        Experiment::BtotSweep,
        &base,
        seeds(20),
        UtilityKind::ALL.to_vec(),
    );
    plan.values = vec![256.0];
    let out = run_experiment(&plan, &base).unwrap();
    let mut margins = Vec::new();
    for kind in UtilityKind::ALL {
        let rows: Vec<_> = out.rows.iter().filter(|r| r.kind == kind).collect();
        let get =
            |r: &&lfcomp::harness::Row, n: &str| r.extras.iter().find(|(k, _)| *k == n).unwrap().1;
        let mean = |n: &str| rows.iter().map(|r| get(r, n)).sum::<f64>() / rows.len() as f64;
        margins.push(format!(
            "{kind}: opt/equ {:.3}, opt/min {:.3}",
            mean("lambda_opt") / mean("lambda_equ"),
            mean("lambda_opt") / mean("lambda_min")
        ));
    }
    let summary: Vec<String> = out
        .checks
        .iter()
        .map(|c| format!("{} {}", c.detail, c.name))
        .collect();
    report(
        "9 (opt >= equ and opt >= min in >= 90% of 20 seeds, every kind)",
        out.passed() && out.checks.len() == 8,
        format!("{}; mean ratios {}", summary.join(", "), margins.join("; ")),
    );
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10a_distance_sweep_interior_optimum() {
    let base = ScenarioConfig::desk();
    let plan = ExperimentPlan::new(Experiment::DSweep, &base, seeds(20), vec![UtilityKind::Wsc]);
    let out = run_experiment(&plan, &base).unwrap();
    let means = lfcomp::harness::mean_by_value(&out.rows, UtilityKind::Wsc, &plan.values);
    report(
        "10a (seed-averaged d-sweep argmax interior)",
        out.passed(),
        format!("D {:?} -> mean lambda {:.3?}", plan.values, means),
    );
}

#[test]
fn criterion_10b_power_sweep_shapes() {
    let base = ScenarioConfig::desk();
    let plan = ExperimentPlan::new(
        Experiment::PowerSweep,
        &base,
        seeds(20),
        vec![UtilityKind::Wsc, UtilityKind::Wsee],
    );
    let out = run_experiment(&plan, &base).unwrap();
    let wsc = lfcomp::harness::mean_by_value(&out.rows, UtilityKind::Wsc, &plan.values);
    let wsee = lfcomp::harness::mean_by_value(&out.rows, UtilityKind::Wsee, &plan.values);
    report(
        "10b (WSEE interior argmax over power, WSC nondecreasing)",
        out.passed(),
        format!("P {:?}: WSC {:.3?}, WSEE {:.3?}", plan.values, wsc, wsee),
    );
}

// ---------------------------------------------------------------- 11

fn run_cli(args: &[&str], out: &std::path::Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_lfcomp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    assert!(
        status.status.code().is_some_and(|c| c <= 1),
        "{args:?}: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    std::fs::read(out).unwrap()
}

#[test]
fn criterion_11_cli_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["validate", "--trials", "20000", "--seeds", "3"],
        &["solve", "--kind", "all", "--seeds", "0..2"],
        &["sweep", "--experiment", "convergence", "--seeds", "0..3"],
        &["sweep", "--experiment", "tiny-oracle", "--seeds", "0..3"],
    ];
    let mut identical = 0;
    let start = std::time::Instant::now();
    for (i, args) in runs.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("a{i}.csv")));
        let b = run_cli(args, &dir.path().join(format!("b{i}.csv")));
        if a == b && !a.is_empty() {
            identical += 1;
        }
    }
    report(
        "11 (CLI output byte-identical under fixed seeds)",
        identical == runs.len(),
        format!(
            "{identical}/{} commands identical across reruns ({:.1} s); suite wall time is reported by the test runner",
            runs.len(),
            start.elapsed().as_secs_f64()
        ),
    );
}
