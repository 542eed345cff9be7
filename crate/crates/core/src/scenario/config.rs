use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::kernels::{QuadratureSpec, UtilityKind};
use crate::{Error, Result};

/// A per-BS or per-UE parameter: either one value for everyone or one value each.
#[derive(Debug, Clone, PartialEq)]
pub enum PerEntity<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Copy> PerEntity<T> {
    pub fn get(&self, i: usize) -> T {
        match self {
            PerEntity::All(v) => *v,
            PerEntity::Each(v) => v[i],
        }
    }

    fn check_len(&self, expected: usize, what: &str) -> Result<()> {
        match self {
            PerEntity::Each(v) if v.len() != expected => Err(Error::Config(format!(
                "{what}: expected 1 or {expected} values, got {}",
                v.len()
            ))),
            _ => Ok(()),
        }
    }

    fn values(&self) -> Vec<T> {
        match self {
            PerEntity::All(v) => vec![*v],
            PerEntity::Each(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathLossExponents {
    Scalar(f64),
    /// `matrix[c][c']`: exponent between UEs of cell `c` and BS `c'`.
    Matrix(Vec<Vec<f64>>),
}

impl PathLossExponents {
    pub fn get(&self, cell: usize, bs: usize) -> f64 {
        match self {
            PathLossExponents::Scalar(v) => *v,
            PathLossExponents::Matrix(m) => m[cell][bs],
        }
    }
}

/// Power-model constants of one BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeConstants {
    pub tau: f64,
    pub zeta: f64,
    /// Total processing power, shared by the BS's active subcarriers.
    pub processing_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cluster_radius_m: f64,
    pub bs_ring_radius_m: f64,
    pub num_bs: usize,
    pub num_ue: usize,
    pub num_subcarriers: usize,
    pub num_antennas: usize,
    pub pathloss_exponents: PathLossExponents,
    pub per_bs_power_w: PerEntity<f64>,
    pub noise_w: f64,
    pub feedback_budget: u32,
    pub qos_exponents: PerEntity<f64>,
    pub ee_constants: PerEntity<EeConstants>,
    /// `None` means equal weights `1/|C|`.
    pub weights: Option<PerEntity<f64>>,
    pub epsilon: f64,
    pub iota: u32,
    pub rng_seed: u64,
    pub utility_kind: UtilityKind,
    pub inter_cluster_tiers: u8,
    pub max_iters: usize,
    pub quadrature: QuadratureSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ScenarioConfig {
    /// Reduced-size setup that runs in seconds.
    pub fn desk() -> Self {
        ScenarioConfig {
            cluster_radius_m: 1000.0,
            bs_ring_radius_m: 300.0,
            num_bs: 3,
            num_ue: 30,
            num_subcarriers: 16,
            num_antennas: 5,
            pathloss_exponents: PathLossExponents::Scalar(4.0),
            per_bs_power_w: PerEntity::All(10.0),
            noise_w: 1e-10,
            feedback_budget: 256,
            qos_exponents: PerEntity::All(1.0),
            ee_constants: PerEntity::All(EeConstants {
                tau: 0.1,
                zeta: 0.1,
                processing_w: 0.5,
            }),
            weights: None,
            epsilon: 0.1,
            iota: 1,
            rng_seed: 1,
            utility_kind: UtilityKind::Wsc,
            inter_cluster_tiers: 2,
            max_iters: 20,
            quadrature: QuadratureSpec::default(),
        }
    }

    /// Full-size setup of the original simulation study.
    pub fn paper() -> Self {
        ScenarioConfig {
            num_bs: 4,
            num_ue: 50,
            num_subcarriers: 64,
            num_antennas: 8,
            feedback_budget: 1024,
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper" => Ok(Self::paper()),
            other => Err(Error::Usage(format!("unknown preset '{other}'"))),
        }
    }

    pub fn weight(&self, bs: usize) -> f64 {
        match &self.weights {
            None => 1.0 / self.num_bs as f64,
            Some(w) => w.get(bs),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.cluster_radius_m > 0.0 && self.cluster_radius_m.is_finite()) {
            return fail(format!(
                "cluster_radius_m must be > 0, got {}",
                self.cluster_radius_m
            ));
        }
        if !(self.bs_ring_radius_m >= 0.0 && self.bs_ring_radius_m <= self.cluster_radius_m) {
            return fail(format!(
                "bs_ring_radius_m must lie in [0, {}], got {}",
                self.cluster_radius_m, self.bs_ring_radius_m
            ));
        }
        if self.num_bs == 0 || self.num_ue == 0 || self.num_subcarriers == 0 {
            return fail("num_bs, num_ue and num_subcarriers must be positive".into());
        }
        if self.num_antennas <= self.num_bs || self.num_antennas < 2 {
            return fail(format!(
                "num_antennas ({}) must exceed num_bs ({}) and be at least 2",
                self.num_antennas, self.num_bs
            ));
        }
        match &self.pathloss_exponents {
            PathLossExponents::Scalar(v) => check_exponent(*v)?,
            PathLossExponents::Matrix(m) => {
                if m.len() != self.num_bs || m.iter().any(|r| r.len() != self.num_bs) {
                    return fail(format!(
                        "pathloss_exponents matrix must be {0}x{0}",
                        self.num_bs
                    ));
                }
                for v in m.iter().flatten() {
                    check_exponent(*v)?;
                }
            }
        }
        self.per_bs_power_w
            .check_len(self.num_bs, "per_bs_power_w")?;
        if self
            .per_bs_power_w
            .values()
            .iter()
            .any(|p| !(*p >= 0.0 && p.is_finite()))
        {
            return fail("per_bs_power_w must be finite and >= 0".into());
        }
        if !(self.noise_w > 0.0 && self.noise_w.is_finite()) {
            return fail(format!("noise_w must be > 0, got {}", self.noise_w));
        }
        self.qos_exponents.check_len(self.num_ue, "qos_exponents")?;
        if self
            .qos_exponents
            .values()
            .iter()
            .any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return fail("qos_exponents must be finite and >= 0".into());
        }
        if matches!(self.utility_kind, UtilityKind::Wsec | UtilityKind::Wseee)
            && self.qos_exponents.values().iter().any(|t| *t <= 0.0)
        {
            return fail("effective-capacity utilities need qos_exponents > 0".into());
        }
        self.ee_constants.check_len(self.num_bs, "ee_constants")?;
        for e in self.ee_constants.values() {
            let ok = [e.tau, e.zeta, e.processing_w]
                .iter()
                .all(|v| *v >= 0.0 && v.is_finite());
            if !ok {
                return fail("ee_constants entries must be finite and >= 0".into());
            }
        }
        if let Some(w) = &self.weights {
            w.check_len(self.num_bs, "weights")?;
            if w.values().iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return fail("weights must be finite and > 0".into());
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return fail(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.iota < 1 {
            return fail("iota must be >= 1".into());
        }
        if self.inter_cluster_tiers > 2 {
            return fail(format!(
                "inter_cluster_tiers must be 0, 1 or 2, got {}",
                self.inter_cluster_tiers
            ));
        }
        if self.max_iters == 0 {
            return fail("max_iters must be >= 1".into());
        }
        self.quadrature.validate()
    }

    /// Reads `key = value` lines on top of the desk preset.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_over(&text, Self::desk())
    }

    /// Applies `key = value` lines to `base`. Blank lines and `#` comments are
    /// ignored; unknown keys are an error.
    pub fn parse_over(text: &str, mut base: Self) -> Result<Self> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            base.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, inner(e))))?;
        }
        base.validate()?;
        Ok(base)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "cluster_radius_m" => self.cluster_radius_m = scalar(key, value)?,
            "bs_ring_radius_m" => self.bs_ring_radius_m = scalar(key, value)?,
            "num_bs" => self.num_bs = scalar(key, value)?,
            "num_ue" => self.num_ue = scalar(key, value)?,
            "num_subcarriers" => self.num_subcarriers = scalar(key, value)?,
            "num_antennas" => self.num_antennas = scalar(key, value)?,
            "pathloss_exponents" => {
                let rows: Vec<Vec<f64>> = value
                    .split(';')
                    .map(|r| list(key, r))
                    .collect::<Result<_>>()?;
                self.pathloss_exponents = if rows.len() == 1 && rows[0].len() == 1 {
                    PathLossExponents::Scalar(rows[0][0])
                } else {
                    PathLossExponents::Matrix(rows)
                };
            }
            "per_bs_power_w" => self.per_bs_power_w = per_entity(key, value)?,
            "noise_w" => self.noise_w = scalar(key, value)?,
            "feedback_budget" => self.feedback_budget = scalar(key, value)?,
            "qos_exponents" => self.qos_exponents = per_entity(key, value)?,
            "ee_constants" => {
                let triples: Vec<EeConstants> = value
                    .split(';')
                    .map(|t| {
                        let v: Vec<f64> = list(key, t)?;
                        match v.as_slice() {
                            [tau, zeta, ps] => Ok(EeConstants {
                                tau: *tau,
                                zeta: *zeta,
                                processing_w: *ps,
                            }),
                            _ => Err(Error::Config(format!(
                                "{key}: expected tau,zeta,processing_w triples"
                            ))),
                        }
                    })
                    .collect::<Result<_>>()?;
                self.ee_constants = if triples.len() == 1 {
                    PerEntity::All(triples[0])
                } else {
                    PerEntity::Each(triples)
                };
            }
            "weights" => {
                self.weights = if value.eq_ignore_ascii_case("equal") {
                    None
                } else {
                    Some(per_entity(key, value)?)
                }
            }
            "epsilon" => self.epsilon = scalar(key, value)?,
            "iota" => self.iota = scalar(key, value)?,
            "rng_seed" => self.rng_seed = scalar(key, value)?,
            "utility_kind" => self.utility_kind = value.parse()?,
            "inter_cluster_tiers" => self.inter_cluster_tiers = scalar(key, value)?,
            "max_iters" => self.max_iters = scalar(key, value)?,
            "quad_rel_tol" => self.quadrature.rel_tol = scalar(key, value)?,
            "quad_abs_tol" => self.quadrature.abs_tol = scalar(key, value)?,
            "quad_max_subdivisions" => self.quadrature.max_subdivisions = scalar(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parses back to an equal config.
    pub fn to_text(&self) -> String {
        fn join<T: fmt::Display>(v: &[T], sep: &str) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(sep)
        }
        let pl = match &self.pathloss_exponents {
            PathLossExponents::Scalar(v) => v.to_string(),
            PathLossExponents::Matrix(m) => {
                m.iter().map(|r| join(r, ",")).collect::<Vec<_>>().join(";")
            }
        };
        let ee = self
            .ee_constants
            .values()
            .iter()
            .map(|e| format!("{},{},{}", e.tau, e.zeta, e.processing_w))
            .collect::<Vec<_>>()
            .join(";");
        let weights = match &self.weights {
            None => "equal".to_string(),
            Some(w) => join(&w.values(), ","),
        };
        let lines = [
            ("cluster_radius_m", self.cluster_radius_m.to_string()),
            ("bs_ring_radius_m", self.bs_ring_radius_m.to_string()),
            ("num_bs", self.num_bs.to_string()),
            ("num_ue", self.num_ue.to_string()),
            ("num_subcarriers", self.num_subcarriers.to_string()),
            ("num_antennas", self.num_antennas.to_string()),
            ("pathloss_exponents", pl),
            ("per_bs_power_w", join(&self.per_bs_power_w.values(), ",")),
            ("noise_w", self.noise_w.to_string()),
            ("feedback_budget", self.feedback_budget.to_string()),
            ("qos_exponents", join(&self.qos_exponents.values(), ",")),
            ("ee_constants", ee),
            ("weights", weights),
            ("epsilon", self.epsilon.to_string()),
            ("iota", self.iota.to_string()),
            ("rng_seed", self.rng_seed.to_string()),
            ("utility_kind", self.utility_kind.to_string()),
            ("inter_cluster_tiers", self.inter_cluster_tiers.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("quad_rel_tol", self.quadrature.rel_tol.to_string()),
            ("quad_abs_tol", self.quadrature.abs_tol.to_string()),
            (
                "quad_max_subdivisions",
                self.quadrature.max_subdivisions.to_string(),
            ),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn inner(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn check_exponent(v: f64) -> Result<()> {
    if v > 2.0 && v < 6.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "path-loss exponents must lie in (2, 6), got {v}"
        )))
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| scalar(key, v)).collect()
}

fn per_entity<T: FromStr + Copy>(key: &str, value: &str) -> Result<PerEntity<T>> {
    let mut v = list(key, value)?;
    Ok(if v.len() == 1 {
        PerEntity::All(v.remove(0))
    } else {
        PerEntity::Each(v)
    })
}
