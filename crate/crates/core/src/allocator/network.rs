use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use super::state::AllocationState;
use crate::kernels::{delta, Evaluator, LinkContext, LinkEnergy, UtilityKind};
use crate::scenario::{ClusterTopology, ScenarioConfig};
use crate::{Error, Result};

/// Gain (in interference-to-noise units) below which the interference-driven
/// split gives the bit to the serving BS instead.
pub const MIN_INTERFERENCE_GAIN: f64 = 1e-12;

/// How feedback bits are partitioned at each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Greedy utility maximization at every level.
    Opt,
    /// As `Opt`, but each UE splits its bits to greedily reduce residual interference.
    Min,
    /// Equal shares at every level.
    Equ,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Opt, Strategy::Min, Strategy::Equ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Opt => "opt",
            Strategy::Min => "min",
            Strategy::Equ => "equ",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "opt" => Ok(Strategy::Opt),
            "min" => Ok(Strategy::Min),
            "equ" => Ok(Strategy::Equ),
            _ => Err(Error::Usage(format!("unknown strategy '{s}'"))),
        }
    }
}

/// Per-BS processing power share, fixed by the activity matrix at the time
/// utilities are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessingSnapshot {
    share: Vec<f64>,
}

impl ProcessingSnapshot {
    pub fn new(config: &ScenarioConfig, state: &AllocationState) -> Self {
        let share = state
            .active_counts()
            .iter()
            .enumerate()
            .map(|(c, &k)| config.ee_constants.get(c).processing_w / k.max(1) as f64)
            .collect();
        ProcessingSnapshot { share }
    }

    pub fn share(&self, bs: usize) -> f64 {
        self.share[bs]
    }
}

/// Greedy split sequence of one UE: entry `b` is the split after `b` bits.
#[derive(Debug, Default)]
struct Trajectory {
    utilities: Vec<f64>,
    splits: Vec<Vec<u32>>,
}

/// Result of partitioning one UE's bits across the active BSs.
#[derive(Debug, Clone, PartialEq)]
pub struct UeSplit {
    pub utility: f64,
    /// Bits per BS, aligned with the active set passed in.
    pub split: Vec<u32>,
    /// Utility after each added bit, starting from zero bits.
    pub trace: Vec<f64>,
}

type TrajectoryKey = (usize, usize, u64, u64);

/// A placed cluster together with the utility in use and the evaluation caches.
pub struct Network<'a> {
    pub topology: &'a ClusterTopology,
    pub config: &'a ScenarioConfig,
    pub kind: UtilityKind,
    pub strategy: Strategy,
    evaluator: Evaluator,
    trajectories: Mutex<HashMap<TrajectoryKey, Trajectory>>,
}

impl<'a> Network<'a> {
    pub fn new(
        topology: &'a ClusterTopology,
        config: &'a ScenarioConfig,
        kind: UtilityKind,
        strategy: Strategy,
    ) -> Self {
        Network {
            topology,
            config,
            kind,
            strategy,
            evaluator: Evaluator::new(config.quadrature),
            trajectories: Mutex::new(HashMap::new()),
        }
    }

    pub fn num_bs(&self) -> usize {
        self.topology.num_bs()
    }

    pub fn weight(&self, bs: usize) -> f64 {
        self.config.weight(bs)
    }

    pub fn power_per_subcarrier(&self, bs: usize) -> f64 {
        self.config.per_bs_power_w.get(bs) / self.config.num_subcarriers as f64
    }

    /// Context of UE `ue` served by `cell` with `split[i]` bits towards `active[i]`.
    pub fn context(
        &self,
        ue: usize,
        cell: usize,
        active: &[usize],
        split: &[u32],
        snapshot: &ProcessingSnapshot,
    ) -> LinkContext {
        let rho = &self.topology.rho[ue];
        let mut rho_int = Vec::with_capacity(active.len().saturating_sub(1));
        let mut power_int = Vec::with_capacity(rho_int.capacity());
        let mut bits = Vec::with_capacity(active.len());
        bits.push(0);
        for (&c, &b) in active.iter().zip(split) {
            if c == cell {
                bits[0] = b;
            } else {
                rho_int.push(rho[c]);
                power_int.push(self.power_per_subcarrier(c));
                bits.push(b);
            }
        }
        let ee = self.config.ee_constants.get(cell);
        LinkContext {
            rho_own: rho[cell],
            rho_int,
            power_own: self.power_per_subcarrier(cell),
            power_int,
            sigma2: self.topology.effective_noise[ue],
            n_t: self.config.num_antennas,
            active_count: active.len(),
            bit_split: bits,
            theta: self.config.qos_exponents.get(ue),
            energy: LinkEnergy {
                processing_w: snapshot.share(cell),
                tau: ee.tau,
                zeta: ee.zeta,
            },
            kind: self.kind,
        }
    }

    /// `Λ` of one link.
    pub fn utility(
        &self,
        ue: usize,
        cell: usize,
        active: &[usize],
        split: &[u32],
        snapshot: &ProcessingSnapshot,
    ) -> Result<f64> {
        self.evaluator
            .utility(&self.context(ue, cell, active, split, snapshot))
    }

    /// Bits of UE `ue` (cell `cell`) split across `active` according to the
    /// network's strategy.
    pub fn ue_split(
        &self,
        ue: usize,
        cell: usize,
        active: &[usize],
        budget: u32,
        snapshot: &ProcessingSnapshot,
    ) -> Result<UeSplit> {
        if self.strategy == Strategy::Equ {
            let split = equal_shares(budget, active.len());
            let utility = self.utility(ue, cell, active, &split, snapshot)?;
            return Ok(UeSplit {
                utility,
                split,
                trace: vec![utility],
            });
        }
        let mask = active.iter().fold(0usize, |m, &c| m | (1 << c));
        let key = (ue, mask, snapshot.share(cell).to_bits(), cell as u64);
        let mut cache = self.trajectories.lock().unwrap_or_else(|e| e.into_inner());
        let traj = cache.entry(key).or_default();
        if traj.splits.is_empty() {
            let split = vec![0; active.len()];
            traj.utilities
                .push(self.utility(ue, cell, active, &split, snapshot)?);
            traj.splits.push(split);
        }
        while traj.splits.len() <= budget as usize {
            let last = traj.splits.last().cloned().unwrap_or_default();
            let (split, utility) = match self.strategy {
                Strategy::Min => {
                    let split = self.min_interference_step(ue, cell, active, &last)?;
                    let u = self.utility(ue, cell, active, &split, snapshot)?;
                    (split, u)
                }
                _ => self.greedy_step(ue, cell, active, &last, snapshot)?,
            };
            traj.splits.push(split);
            traj.utilities.push(utility);
        }
        let b = budget as usize;
        Ok(UeSplit {
            utility: traj.utilities[b],
            split: traj.splits[b].clone(),
            trace: traj.utilities[..=b].to_vec(),
        })
    }

    /// Adds one bit to the BS whose increment maximizes `Λ`; lowest index on ties.
    fn greedy_step(
        &self,
        ue: usize,
        cell: usize,
        active: &[usize],
        current: &[u32],
        snapshot: &ProcessingSnapshot,
    ) -> Result<(Vec<u32>, f64)> {
        let mut best: Option<(Vec<u32>, f64)> = None;
        for i in 0..active.len() {
            let mut cand = current.to_vec();
            cand[i] += 1;
            let u = self.utility(ue, cell, active, &cand, snapshot)?;
            if best.as_ref().is_none_or(|(_, bu)| u > *bu) {
                best = Some((cand, u));
            }
        }
        best.ok_or_else(|| Error::Domain("empty active set".into()))
    }

    /// Adds one bit to the interferer whose residual interference (relative
    /// to the UE's noise) drops the most; the serving BS gets it when no
    /// interferer gains more than [`MIN_INTERFERENCE_GAIN`].
    fn min_interference_step(
        &self,
        ue: usize,
        cell: usize,
        active: &[usize],
        current: &[u32],
    ) -> Result<Vec<u32>> {
        let n_t = self.config.num_antennas;
        let noise = self.topology.effective_noise[ue];
        let mut best: Option<(usize, f64)> = None;
        for (i, &c) in active.iter().enumerate() {
            if c == cell {
                continue;
            }
            let coeff = self.topology.rho[ue][c] * self.power_per_subcarrier(c) / noise;
            let gain = coeff * (delta(current[i], n_t)? - delta(current[i] + 1, n_t)?);
            if gain > MIN_INTERFERENCE_GAIN && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let target = match best {
            Some((i, _)) => i,
            None => active
                .iter()
                .position(|&c| c == cell)
                .ok_or_else(|| Error::Domain("serving BS not in active set".into()))?,
        };
        let mut next = current.to_vec();
        next[target] += 1;
        Ok(next)
    }

    pub fn cached_utilities(&self) -> usize {
        self.evaluator.cached_entries()
    }
}

/// `total` split into `parts` shares differing by at most one, the larger
/// shares first.
pub fn equal_shares(total: u32, parts: usize) -> Vec<u32> {
    if parts == 0 {
        return Vec::new();
    }
    let base = total / parts as u32;
    let extra = (total % parts as u32) as usize;
    (0..parts).map(|i| base + u32::from(i < extra)).collect()
}
