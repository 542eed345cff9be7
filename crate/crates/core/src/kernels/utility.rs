use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use super::capacity::{capacity_r1, capacity_r2};
use super::effective::eff_capacity_r4;
use super::energy::{eff_energy_eff, energy_eff};
use super::quad::QuadratureSpec;
use crate::{Error, Result};

/// Which per-link utility the weighted sum is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UtilityKind {
    /// Capacity.
    Wsc,
    /// Effective capacity.
    Wsec,
    /// Energy efficiency.
    Wsee,
    /// Effective energy efficiency.
    Wseee,
}

impl UtilityKind {
    pub const ALL: [UtilityKind; 4] = [
        UtilityKind::Wsc,
        UtilityKind::Wsec,
        UtilityKind::Wsee,
        UtilityKind::Wseee,
    ];

    pub fn needs_qos(self) -> bool {
        matches!(self, UtilityKind::Wsec | UtilityKind::Wseee)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UtilityKind::Wsc => "wsc",
            UtilityKind::Wsec => "wsec",
            UtilityKind::Wsee => "wsee",
            UtilityKind::Wseee => "wseee",
        }
    }
}

impl fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UtilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wsc" => Ok(UtilityKind::Wsc),
            "wsec" => Ok(UtilityKind::Wsec),
            "wsee" => Ok(UtilityKind::Wsee),
            "wseee" => Ok(UtilityKind::Wseee),
            _ => Err(Error::Config(format!("unknown utility kind '{s}'"))),
        }
    }
}

/// Power-model terms of the serving BS on one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEnergy {
    /// Processing power attributed to this subcarrier, watts.
    pub processing_w: f64,
    pub tau: f64,
    pub zeta: f64,
}

impl Default for LinkEnergy {
    fn default() -> Self {
        LinkEnergy {
            processing_w: 0.5 / 64.0,
            tau: 0.1,
            zeta: 0.1,
        }
    }
}

/// Everything needed to evaluate the utility of one scheduled link.
///
/// `bit_split[0]` is the number of bits the UE spends on its serving BS;
/// `bit_split[i + 1]` pairs with `rho_int[i]` and `power_int[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkContext {
    pub rho_own: f64,
    pub rho_int: Vec<f64>,
    pub power_own: f64,
    pub power_int: Vec<f64>,
    pub sigma2: f64,
    pub n_t: usize,
    pub active_count: usize,
    pub bit_split: Vec<u32>,
    pub theta: f64,
    pub energy: LinkEnergy,
    pub kind: UtilityKind,
}

impl LinkContext {
    /// A single-BS link with no interferers.
    pub fn isolated(rho: f64, power: f64, sigma2: f64, n_t: usize, bits: u32) -> Self {
        LinkContext {
            rho_own: rho,
            rho_int: Vec::new(),
            power_own: power,
            power_int: Vec::new(),
            sigma2,
            n_t,
            active_count: 1,
            bit_split: vec![bits],
            theta: 1.0,
            energy: LinkEnergy::default(),
            kind: UtilityKind::Wsc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.active_count;
        if self.n_t < 2 || k == 0 || k >= self.n_t {
            return Err(Error::Domain(format!(
                "need 1 <= active BSs < antennas, got {k} active with {} antennas",
                self.n_t
            )));
        }
        if self.rho_int.len() != k - 1 || self.power_int.len() != k - 1 || self.bit_split.len() != k
        {
            return Err(Error::Domain(format!(
                "interferer lists must have {} entries and the bit split {k}",
                k - 1
            )));
        }
        let gain_ok = |g: f64| g > 0.0 && g <= 1.0;
        if !gain_ok(self.rho_own) || !self.rho_int.iter().all(|&g| gain_ok(g)) {
            return Err(Error::Domain("attenuations must lie in (0, 1]".into()));
        }
        let power_ok = |p: f64| p >= 0.0 && p.is_finite();
        if !power_ok(self.power_own) || !self.power_int.iter().all(|&p| power_ok(p)) {
            return Err(Error::Domain("powers must be finite and >= 0".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Domain(format!(
                "noise must be > 0, got {}",
                self.sigma2
            )));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Domain(format!(
                "theta must be >= 0, got {}",
                self.theta
            )));
        }
        let e = &self.energy;
        if ![e.processing_w, e.tau, e.zeta]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite())
        {
            return Err(Error::Domain(
                "energy constants must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn own_bits(&self) -> u32 {
        self.bit_split[0]
    }

    pub fn interferer_bits(&self) -> &[u32] {
        &self.bit_split[1..]
    }

    /// Received power of the serving link before fading, `ρ P`.
    pub fn signal_scale(&self) -> f64 {
        self.rho_own * self.power_own
    }

    fn key(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(12 + 3 * self.rho_int.len());
        key.push(self.kind as u64);
        key.push(self.n_t as u64);
        key.push(self.active_count as u64);
        for v in [
            self.rho_own,
            self.power_own,
            self.sigma2,
            self.theta,
            self.energy.processing_w,
            self.energy.tau,
            self.energy.zeta,
        ] {
            key.push(v.to_bits());
        }
        key.extend(self.rho_int.iter().map(|v| v.to_bits()));
        key.extend(self.power_int.iter().map(|v| v.to_bits()));
        key.extend(self.bit_split.iter().map(|&b| b as u64));
        key
    }
}

/// Utility `Λ` of one link according to `ctx.kind`.
pub fn link_utility(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<f64> {
    ctx.validate()?;
    if ctx.kind.needs_qos() && ctx.theta <= 0.0 {
        return Err(Error::Domain(
            "effective-capacity utilities need theta > 0".into(),
        ));
    }
    let value = match ctx.kind {
        UtilityKind::Wsc => capacity_r2(ctx, spec)?,
        UtilityKind::Wsec => eff_capacity_r4(ctx, spec)?,
        UtilityKind::Wsee => energy_eff(ctx, capacity_r2(ctx, spec)?),
        UtilityKind::Wseee => eff_energy_eff(ctx, eff_capacity_r4(ctx, spec)?),
    };
    Ok(value)
}

/// The capacity estimate the analytic utilities are built on, Result 1 form.
pub fn link_capacity(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<f64> {
    ctx.validate()?;
    capacity_r1(ctx, spec)
}

/// Memoizing front end for [`link_utility`]; greedy searches re-query the
/// same contexts many times.
#[derive(Debug, Default)]
pub struct Evaluator {
    spec: QuadratureSpec,
    memo: RwLock<HashMap<Vec<u64>, f64>>,
}

impl Evaluator {
    pub fn new(spec: QuadratureSpec) -> Self {
        Evaluator {
            spec,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn utility(&self, ctx: &LinkContext) -> Result<f64> {
        let key = ctx.key();
        if let Some(v) = self
            .memo
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&key)
        {
            return Ok(*v);
        }
        let v = link_utility(ctx, &self.spec)?;
        self.memo
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, v);
        Ok(v)
    }

    pub fn cached_entries(&self) -> usize {
        self.memo.read().unwrap_or_else(|e| e.into_inner()).len()
    }
}
