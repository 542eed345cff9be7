//! Feedback-bit partitioning: per UE, per cluster and across subcarriers.

use super::network::{equal_shares, Network, ProcessingSnapshot, Strategy, UeSplit};
use super::state::{AllocationState, FeedbackPlan};
use crate::Result;

/// Greedy split of `budget` bits of UE `ue` across the active BSs.
pub fn u_ifbp(
    net: &Network,
    ue: usize,
    cell: usize,
    active: &[usize],
    budget: u32,
    snapshot: &ProcessingSnapshot,
) -> Result<UeSplit> {
    net.ue_split(ue, cell, active, budget, snapshot)
}

/// Partition of one subcarrier's budget among its scheduled links.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSplit {
    /// `λ_n = Σ_c ω_c Λ`.
    pub lambda: f64,
    /// `(cell, UE)` of every link, in cell order.
    pub links: Vec<(usize, usize)>,
    /// Budget of each link.
    pub cell_budgets: Vec<u32>,
    /// Per-link splits aligned with `active`.
    pub splits: Vec<Vec<u32>>,
    pub active: Vec<usize>,
    /// `λ_n` after each added bit.
    pub trace: Vec<f64>,
}

impl ClusterSplit {
    pub fn write_into(&self, plan: &mut FeedbackPlan, n: usize) {
        plan.clear(n);
        for ((&(c, u), split), _) in self.links.iter().zip(&self.splits).zip(&self.cell_budgets) {
            plan.set_link(n, c, u, &self.active, split);
        }
        plan.subcarrier_budgets[n] = self.cell_budgets.iter().sum();
    }
}

/// Incremental cluster-level partition: bits are added one at a time to the
/// cell whose weighted utility grows the most (lowest index on ties).
pub struct ClusterGreedy<'n, 'a> {
    net: &'n Network<'a>,
    snapshot: ProcessingSnapshot,
    links: Vec<(usize, usize)>,
    active: Vec<usize>,
    budgets: Vec<u32>,
    values: Vec<f64>,
    trace: Vec<f64>,
}

impl<'n, 'a> ClusterGreedy<'n, 'a> {
    pub fn new(
        net: &'n Network<'a>,
        links: Vec<(usize, usize)>,
        snapshot: ProcessingSnapshot,
    ) -> Result<Self> {
        let active: Vec<usize> = links.iter().map(|&(c, _)| c).collect();
        let mut values = Vec::with_capacity(links.len());
        for &(c, u) in &links {
            values.push(net.weight(c) * net.ue_split(u, c, &active, 0, &snapshot)?.utility);
        }
        let lambda = values.iter().sum();
        Ok(ClusterGreedy {
            net,
            snapshot,
            budgets: vec![0; links.len()],
            links,
            active,
            values,
            trace: vec![lambda],
        })
    }

    pub fn lambda(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn total_bits(&self) -> u32 {
        self.budgets.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Best `(link index, weighted utility after the extra bit)`.
    fn best_candidate(&self) -> Result<Option<(usize, f64)>> {
        if self.net.strategy == Strategy::Equ {
            let total = self.total_bits() + 1;
            let shares = equal_shares(total, self.links.len());
            let i = match (0..self.links.len()).find(|&i| shares[i] != self.budgets[i]) {
                Some(i) => i,
                None => return Ok(None),
            };
            return Ok(Some((i, self.value_at(i, shares[i])?)));
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..self.links.len() {
            let v = self.value_at(i, self.budgets[i] + 1)?;
            let gain = v - self.values[i];
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((i, gain, v));
            }
        }
        Ok(best.map(|(i, _, v)| (i, v)))
    }

    fn value_at(&self, i: usize, budget: u32) -> Result<f64> {
        let (c, u) = self.links[i];
        Ok(self.net.weight(c)
            * self
                .net
                .ue_split(u, c, &self.active, budget, &self.snapshot)?
                .utility)
    }

    /// `λ_n` if one more bit were added.
    pub fn peek(&self) -> Result<Option<f64>> {
        Ok(self
            .best_candidate()?
            .map(|(i, v)| self.lambda() - self.values[i] + v))
    }

    /// Adds one bit; returns `false` when there is no link to give it to.
    pub fn step(&mut self) -> Result<bool> {
        match self.best_candidate()? {
            Some((i, v)) => {
                self.budgets[i] += 1;
                self.values[i] = v;
                self.trace.push(self.lambda());
                Ok(true)
            }
            None => Ok(false),
        }
    }

    pub fn finish(&self) -> Result<ClusterSplit> {
        let mut splits = Vec::with_capacity(self.links.len());
        let mut values = Vec::with_capacity(self.links.len());
        for (i, &(c, u)) in self.links.iter().enumerate() {
            let s = self
                .net
                .ue_split(u, c, &self.active, self.budgets[i], &self.snapshot)?;
            values.push(self.net.weight(c) * s.utility);
            splits.push(s.split);
        }
        Ok(ClusterSplit {
            lambda: values.iter().sum(),
            links: self.links.clone(),
            cell_budgets: self.budgets.clone(),
            splits,
            active: self.active.clone(),
            trace: self.trace.clone(),
        })
    }
}

/// Partition of `budget` bits on one subcarrier among the scheduled links.
pub fn c_ifbp(
    net: &Network,
    links: &[(usize, usize)],
    budget: u32,
    snapshot: &ProcessingSnapshot,
) -> Result<ClusterSplit> {
    let mut g = ClusterGreedy::new(net, links.to_vec(), snapshot.clone())?;
    for _ in 0..budget {
        if !g.step()? {
            break;
        }
    }
    g.finish()
}

/// Output of the subcarrier-level partition.
#[derive(Debug, Clone, PartialEq)]
pub struct FbpResult {
    pub plan: FeedbackPlan,
    pub lambda: f64,
    pub lambda_n: Vec<f64>,
    /// Total utility after each residual bit, starting after the equal phase.
    pub trace: Vec<f64>,
    /// Per-subcarrier cluster-level traces.
    pub cluster_traces: Vec<Vec<f64>>,
}

/// Greedy partition of `b_tot` bits across subcarriers, cells and UE splits
/// for a fixed schedule.
///
/// Every subcarrier with at least one scheduled link first receives
/// `⌊b_tot/(ι·|N|)⌋` bits; the remainder (including the shares of empty
/// subcarriers, which cannot carry feedback) goes one bit at a time to the
/// subcarrier whose `λ_n` grows the most.
pub fn gfbp(net: &Network, state: &AllocationState, b_tot: u32, iota: u32) -> Result<FbpResult> {
    if iota == 0 {
        return Err(crate::Error::Domain("iota must be >= 1".into()));
    }
    let num_n = state.num_subcarriers();
    let snapshot = ProcessingSnapshot::new(net.config, state);
    let mut clusters = Vec::with_capacity(num_n);
    for n in 0..num_n {
        clusters.push(ClusterGreedy::new(
            net,
            state.links(net.topology, n),
            snapshot.clone(),
        )?);
    }
    let usable: Vec<usize> = (0..num_n).filter(|&n| !clusters[n].is_empty()).collect();
    let mut residual = b_tot;
    if !usable.is_empty() {
        match net.strategy {
            Strategy::Equ => {
                let shares = equal_shares(b_tot, usable.len());
                for (&n, &b) in usable.iter().zip(&shares) {
                    for _ in 0..b {
                        clusters[n].step()?;
                    }
                }
                residual = 0;
            }
            _ => {
                let floor = b_tot / (iota * num_n as u32);
                for &n in &usable {
                    for _ in 0..floor {
                        clusters[n].step()?;
                    }
                    residual -= floor;
                }
            }
        }
    }
    let mut lambda_n: Vec<f64> = clusters.iter().map(ClusterGreedy::lambda).collect();
    let mut trace = vec![lambda_n.iter().sum::<f64>()];
    if !usable.is_empty() {
        for _ in 0..residual {
            let mut best: Option<(usize, f64)> = None;
            for &n in &usable {
                if let Some(v) = clusters[n].peek()? {
                    let gain = v - lambda_n[n];
                    if best.is_none_or(|(_, g)| gain > g) {
                        best = Some((n, gain));
                    }
                }
            }
            let Some((n, _)) = best else { break };
            clusters[n].step()?;
            lambda_n[n] = clusters[n].lambda();
            trace.push(lambda_n.iter().sum());
        }
    }
    let mut plan = FeedbackPlan::zero(state.num_ue(), state.num_bs(), num_n);
    let mut cluster_traces = Vec::with_capacity(num_n);
    for (n, g) in clusters.iter().enumerate() {
        let split = g.finish()?;
        lambda_n[n] = split.lambda;
        split.write_into(&mut plan, n);
        cluster_traces.push(split.trace);
    }
    Ok(FbpResult {
        lambda: lambda_n.iter().sum(),
        plan,
        lambda_n,
        trace,
        cluster_traces,
    })
}
