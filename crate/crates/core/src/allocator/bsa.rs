//! Cluster-based subcarrier assignment: UE re-selection and BS switch-off.

use super::greedy::{c_ifbp, ClusterSplit};
use super::network::{Network, ProcessingSnapshot};
use super::state::{AllocationState, FeedbackPlan};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BsaResult {
    pub state: AllocationState,
    pub plan: FeedbackPlan,
    pub lambda: f64,
    pub lambda_n: Vec<f64>,
    /// Per subcarrier, `λ_n` after re-selection and after each accepted switch-off.
    pub traces: Vec<Vec<f64>>,
}

/// Picks the UE of `cell` with the best split-optimized utility for `budget`
/// bits; lowest UE index on ties.
fn best_ue(
    net: &Network,
    cell: usize,
    active: &[usize],
    budget: u32,
    snapshot: &ProcessingSnapshot,
) -> Result<(usize, f64, Vec<u32>)> {
    let mut best: Option<(usize, f64, Vec<u32>)> = None;
    for &u in &net.topology.cells[cell] {
        let s = net.ue_split(u, cell, active, budget, snapshot)?;
        if best.as_ref().is_none_or(|(_, v, _)| s.utility > *v) {
            best = Some((u, s.utility, s.split));
        }
    }
    Ok(best.expect("active cell without UEs"))
}

/// Re-selects the UE of every link in `split` under its current budget.
fn reselect(
    net: &Network,
    split: &ClusterSplit,
    snapshot: &ProcessingSnapshot,
) -> Result<ClusterSplit> {
    let mut out = split.clone();
    let mut lambda = 0.0;
    for (i, &(c, _)) in split.links.iter().enumerate() {
        let (u, v, s) = best_ue(net, c, &split.active, split.cell_budgets[i], snapshot)?;
        out.links[i] = (c, u);
        out.splits[i] = s;
        lambda += net.weight(c) * v;
    }
    out.lambda = lambda;
    Ok(out)
}

/// Current partition of subcarrier `n` read back from a plan.
fn current_split(
    net: &Network,
    state: &AllocationState,
    plan: &FeedbackPlan,
    n: usize,
) -> ClusterSplit {
    let links = state.links(net.topology, n);
    let active: Vec<usize> = links.iter().map(|&(c, _)| c).collect();
    // Each cell keeps the bits its scheduled UE spent across all BSs.
    let cell_budgets: Vec<u32> = links
        .iter()
        .map(|&(_, u)| plan.splits[n][u].iter().sum())
        .collect();
    let splits = links
        .iter()
        .map(|&(_, u)| active.iter().map(|&c| plan.splits[n][u][c]).collect())
        .collect();
    ClusterSplit {
        lambda: 0.0,
        links,
        cell_budgets,
        splits,
        active,
        trace: Vec::new(),
    }
}

/// One pass of UE re-selection and greedy BS switch-off on every subcarrier.
///
/// A switch-off proposal removes the active BS with the smallest weighted
/// utility, re-partitions the subcarrier's whole budget over the remaining
/// BSs, re-selects their UEs and is accepted only if `λ_n` strictly grows.
/// Proposals stop at the first rejection; BSs are never switched back on.
pub fn c_bsa(net: &Network, state: &AllocationState, plan: &FeedbackPlan) -> Result<BsaResult> {
    let mut state = state.clone();
    let mut plan = plan.clone();
    let num_n = state.num_subcarriers();
    let mut traces = Vec::with_capacity(num_n);
    for n in 0..num_n {
        let snapshot = ProcessingSnapshot::new(net.config, &state);
        let budget = plan.subcarrier_budgets[n];
        let inherited = current_split(net, &state, &plan, n);
        if inherited.links.is_empty() {
            traces.push(vec![0.0]);
            continue;
        }
        let mut best = reselect(net, &inherited, &snapshot)?;
        let mut trace = vec![best.lambda];
        loop {
            let weakest = best
                .links
                .iter()
                .enumerate()
                .map(|(i, &(c, u))| {
                    net.utility(u, c, &best.active, &best.splits[i], &snapshot)
                        .map(|v| (i, net.weight(c) * v))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
                    Some((_, bv)) if bv <= v => acc,
                    _ => Some((i, v)),
                });
            let Some((drop, _)) = weakest else { break };
            let remaining: Vec<(usize, usize)> = best
                .links
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != drop)
                .map(|(_, &l)| l)
                .collect();
            if remaining.is_empty() {
                // An empty cluster has zero utility and is never accepted.
                break;
            }
            let proposal = c_ifbp(net, &remaining, budget, &snapshot)?;
            let proposal = reselect(net, &proposal, &snapshot)?;
            if proposal.lambda > best.lambda {
                best = proposal;
                trace.push(best.lambda);
            } else {
                break;
            }
        }
        for c in 0..state.num_bs() {
            state.deactivate(net.topology, c, n);
        }
        for &(c, u) in &best.links {
            state.schedule(net.topology, c, n, u);
        }
        best.write_into(&mut plan, n);
        traces.push(trace);
    }
    let (lambda, lambda_n) = evaluate_plan(net, &state, &plan)?;
    Ok(BsaResult {
        state,
        plan,
        lambda,
        lambda_n,
        traces,
    })
}

/// `(λ, λ_n)` of a complete allocation, with the processing share taken from
/// the allocation's own activity matrix.
pub fn evaluate_plan(
    net: &Network,
    state: &AllocationState,
    plan: &FeedbackPlan,
) -> Result<(f64, Vec<f64>)> {
    let snapshot = ProcessingSnapshot::new(net.config, state);
    let mut lambda_n = Vec::with_capacity(state.num_subcarriers());
    for n in 0..state.num_subcarriers() {
        let links = state.links(net.topology, n);
        let active: Vec<usize> = links.iter().map(|&(c, _)| c).collect();
        let mut sum = 0.0;
        for &(c, u) in &links {
            let split: Vec<u32> = active.iter().map(|&a| plan.splits[n][u][a]).collect();
            sum += net.weight(c) * net.utility(u, c, &active, &split, &snapshot)?;
        }
        lambda_n.push(sum);
    }
    Ok((lambda_n.iter().sum(), lambda_n))
}
