//! Analytic link kernels against the Monte-Carlo oracle on the three-BS
//! reference link (N_t = 5, 8/6/5 bits, distances 300/400/500 m, α = 4).

use std::io::Write;

use super::Check;
use crate::kernels::{
    capacity_r1, capacity_r2, eff_capacity_r3, eff_capacity_r4, r4_window_holds, LinkContext,
    LinkEnergy, QuadratureSpec, UtilityKind,
};
use crate::mcval::{effective_from_samples, rate_samples, McEstimate, McSpec};
use crate::scenario::{path_loss, ScenarioConfig};
use crate::Result;

pub const POWERS_W: [f64; 4] = [0.0, 0.1, 1.0, 10.0];
pub const THETAS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const R1_TOL: f64 = 0.10;
const R2_TOL: f64 = 0.15;
const R3_TOL: f64 = 0.10;
const R4_TOL: f64 = 0.15;

/// The reference link at per-subcarrier power `power` (W) on every BS.
pub fn reference_link(power: f64, theta: f64) -> Result<LinkContext> {
    let rho = |d: f64| path_loss(d, 4.0);
    Ok(LinkContext {
        rho_own: rho(300.0)?,
        rho_int: vec![rho(400.0)?, rho(500.0)?],
        power_own: power,
        power_int: vec![power, power],
        sigma2: 1e-10,
        n_t: 5,
        active_count: 3,
        bit_split: vec![8, 6, 5],
        theta,
        energy: LinkEnergy::default(),
        kind: UtilityKind::Wsc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub power_w: f64,
    pub theta: f64,
    pub mc_capacity: f64,
    pub mc_std_error: f64,
    pub r1: f64,
    pub r2: f64,
    pub mc_effective: f64,
    pub r3: f64,
    pub r4: f64,
    pub r4_window: bool,
}

fn rel(est: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        if est == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (est - truth).abs() / truth.abs()
    }
}

impl KernelRow {
    pub fn err_r1(&self) -> f64 {
        rel(self.r1, self.mc_capacity)
    }
    pub fn err_r2(&self) -> f64 {
        rel(self.r2, self.mc_capacity)
    }
    pub fn err_r3(&self) -> f64 {
        rel(self.r3, self.mc_effective)
    }
    pub fn err_r4(&self) -> f64 {
        rel(self.r4, self.mc_effective)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub rows: Vec<KernelRow>,
    pub checks: Vec<Check>,
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Evaluates every kernel on the reference link for each power and QoS
/// exponent and checks the accuracy tolerances.
pub fn validate_kernels(base: &ScenarioConfig, mc: &McSpec) -> Result<KernelReport> {
    let spec: QuadratureSpec = base.quadrature;
    let mut rows = Vec::new();
    for &p in &POWERS_W {
        let ctx = reference_link(p, 1.0)?;
        let samples = rate_samples(&ctx, mc)?;
        let est = McEstimate::from_samples(&samples);
        let r1 = capacity_r1(&ctx, &spec)?;
        let r2 = capacity_r2(&ctx, &spec)?;
        for &theta in &THETAS {
            let ctx = LinkContext {
                theta,
                ..ctx.clone()
            };
            let mc_effective = if p == 0.0 {
                0.0
            } else {
                effective_from_samples(&samples, theta)
            };
            rows.push(KernelRow {
                power_w: p,
                theta,
                mc_capacity: est.mean,
                mc_std_error: est.std_error,
                r1,
                r2,
                mc_effective,
                r3: eff_capacity_r3(&ctx, &spec)?,
                r4: eff_capacity_r4(&ctx, &spec)?,
                r4_window: p > 0.0 && r4_window_holds(&ctx, &spec)?,
            });
        }
    }
    let checks = kernel_checks(&rows);
    Ok(KernelReport { rows, checks })
}

fn kernel_checks(rows: &[KernelRow]) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut check = |name: String, passed: bool, detail: String| {
        checks.push(Check {
            name,
            passed,
            detail,
        })
    };
    let zero_ok = rows.iter().filter(|r| r.power_w == 0.0).all(|r| {
        [r.mc_capacity, r.r1, r.r2, r.mc_effective, r.r3, r.r4]
            .iter()
            .all(|v| *v == 0.0)
    });
    check("P=0 row is all zeros".into(), zero_ok, String::new());
    let mut r1_better = 0;
    for &p in POWERS_W.iter().filter(|p| **p > 0.0) {
        let at: Vec<&KernelRow> = rows.iter().filter(|r| r.power_w == p).collect();
        let r = at[0];
        check(
            format!("r1 within {:.0}% at P={p}", R1_TOL * 100.0),
            r.err_r1() <= R1_TOL,
            format!(
                "r1={:.5} mc={:.5} err={:.2}%",
                r.r1,
                r.mc_capacity,
                100.0 * r.err_r1()
            ),
        );
        check(
            format!("r2 within {:.0}% at P={p}", R2_TOL * 100.0),
            r.err_r2() <= R2_TOL,
            format!(
                "r2={:.5} mc={:.5} err={:.2}%",
                r.r2,
                r.mc_capacity,
                100.0 * r.err_r2()
            ),
        );
        if r.err_r1() <= r.err_r2() {
            r1_better += 1;
        }
        for row in at.iter().filter(|r| r.theta >= 1.0) {
            check(
                format!(
                    "r3 within {:.0}% at P={p} theta={}",
                    R3_TOL * 100.0,
                    row.theta
                ),
                row.err_r3() <= R3_TOL,
                format!(
                    "r3={:.5} mc={:.5} err={:.2}%",
                    row.r3,
                    row.mc_effective,
                    100.0 * row.err_r3()
                ),
            );
            if row.r4_window {
                check(
                    format!(
                        "r4 within {:.0}% at P={p} theta={}",
                        R4_TOL * 100.0,
                        row.theta
                    ),
                    row.err_r4() <= R4_TOL,
                    format!(
                        "r4={:.5} mc={:.5} err={:.2}%",
                        row.r4,
                        row.mc_effective,
                        100.0 * row.err_r4()
                    ),
                );
            }
        }
        let ec = |t: f64| {
            at.iter()
                .find(|r| r.theta == t)
                .map(|r| r.r3)
                .unwrap_or(f64::NAN)
        };
        check(
            format!("ec(theta=5) < ec(theta=0.5) at P={p}"),
            ec(5.0) < ec(0.5),
            format!("{:.5} vs {:.5}", ec(5.0), ec(0.5)),
        );
    }
    check(
        "r1 closer than r2 in >= 2 of 3 powers".into(),
        r1_better >= 2,
        format!("{r1_better}/3"),
    );
    checks
}

/// Writes the report rows as CSV. Rates are computed in nats; the report
/// repeats them in bits.
pub fn write_kernel_csv<W: Write>(rows: &[KernelRow], out: W) -> Result<()> {
    let bits = |nats: f64| (nats / std::f64::consts::LN_2).to_string();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "power_w",
        "theta",
        "mc_capacity",
        "mc_std_error",
        "r1",
        "r2",
        "err_r1",
        "err_r2",
        "mc_effective",
        "r3",
        "r4",
        "r4_window",
        "err_r3",
        "err_r4",
        "mc_capacity_bits",
        "r1_bits",
        "r2_bits",
        "mc_effective_bits",
        "r3_bits",
        "r4_bits",
    ])?;
    for r in rows {
        w.write_record([
            r.power_w.to_string(),
            r.theta.to_string(),
            r.mc_capacity.to_string(),
            r.mc_std_error.to_string(),
            r.r1.to_string(),
            r.r2.to_string(),
            r.err_r1().to_string(),
            r.err_r2().to_string(),
            r.mc_effective.to_string(),
            r.r3.to_string(),
            r.r4.to_string(),
            r.r4_window.to_string(),
            r.err_r3().to_string(),
            r.err_r4().to_string(),
            bits(r.mc_capacity),
            bits(r.r1),
            bits(r.r2),
            bits(r.mc_effective),
            bits(r.r3),
            bits(r.r4),
        ])?;
    }
    w.flush()?;
    Ok(())
}
