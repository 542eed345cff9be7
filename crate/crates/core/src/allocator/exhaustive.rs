//! Brute-force optimum for tiny clusters, used to grade the heuristics.

use std::collections::HashMap;

use super::network::{Network, ProcessingSnapshot, Strategy};
use super::state::{AllocationState, FeedbackPlan};
use crate::kernels::UtilityKind;
use crate::scenario::{ClusterTopology, ScenarioConfig};
use crate::{Error, Result};

/// Largest raw search space the oracle accepts.
pub const MAX_CONFIGURATIONS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub state: AllocationState,
    pub plan: FeedbackPlan,
    pub lambda: f64,
    /// Raw number of (schedule, activity, bit composition) configurations covered.
    pub configurations: u128,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All compositions of `total` into `parts` nonnegative integers.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for b in 0..=left {
            cur.push(b);
            rec(left - b, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Upper bound on the raw search space: every activity/schedule choice
/// times every composition of the budget over all (subcarrier, UE, BS) entries.
pub fn search_space(topology: &ClusterTopology, num_subcarriers: usize, b_tot: u32) -> u128 {
    let per_subcarrier: u128 = topology.cells.iter().map(|m| 1 + m.len() as u128).product();
    let schedules = (0..num_subcarriers).fold(1u128, |a, _| a.saturating_mul(per_subcarrier));
    let c = topology.num_bs() as u128;
    let entries = num_subcarriers as u128 * c * c;
    let compositions = binomial(b_tot as u128 + entries - 1, entries - 1);
    schedules.saturating_mul(compositions)
}

/// Best `(value, split)` of one UE for every budget `0..=b_tot`.
type UeTable = Vec<(f64, Vec<u32>)>;

/// True optimum of the weighted-sum utility over schedules, BS activity and
/// all bit partitions.
pub fn exhaustive_optimum(
    topology: &ClusterTopology,
    config: &ScenarioConfig,
    b_tot: u32,
    kind: UtilityKind,
) -> Result<ExhaustiveResult> {
    let num_n = config.num_subcarriers;
    let space = search_space(topology, num_n, b_tot);
    if space > MAX_CONFIGURATIONS {
        return Err(Error::SearchSpaceTooLarge(space));
    }
    let net = Network::new(topology, config, kind, Strategy::Opt);
    let num_bs = topology.num_bs();
    // One slot per (cell, subcarrier): 0 = off, k = k-th UE of the cell.
    let slots: Vec<(usize, usize)> = (0..num_n)
        .flat_map(|n| (0..num_bs).map(move |c| (c, n)))
        .filter(|&(c, _)| !topology.cells[c].is_empty())
        .collect();
    let radix: Vec<usize> = slots
        .iter()
        .map(|&(c, _)| topology.cells[c].len() + 1)
        .collect();
    let mut digits = vec![0usize; slots.len()];
    let mut ue_tables: HashMap<(usize, Vec<usize>, u64), UeTable> = HashMap::new();
    let mut best: Option<(f64, AllocationState, FeedbackPlan)> = None;

    loop {
        let mut state = AllocationState::empty(topology.num_ue(), num_bs, num_n);
        for (&(c, n), &d) in slots.iter().zip(&digits) {
            if d > 0 {
                state.schedule(topology, c, n, topology.cells[c][d - 1]);
            }
        }
        if let Some((value, plan)) = best_plan(&net, &state, b_tot, &mut ue_tables)? {
            if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
                best = Some((value, state, plan));
            }
        }
        // Advance the mixed-radix counter.
        let mut i = 0;
        while i < digits.len() {
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == digits.len() {
            break;
        }
    }
    let (lambda, state, plan) =
        best.ok_or_else(|| Error::Domain("no schedule can carry the feedback budget".into()))?;
    Ok(ExhaustiveResult {
        state,
        plan,
        lambda,
        configurations: space,
    })
}

/// Best `λ_n` of one subcarrier and the per-cell budgets achieving it.
type CellBudgets = (f64, Vec<u32>);

/// Best bit partition for a fixed schedule; `None` if the budget cannot be placed.
fn best_plan(
    net: &Network,
    state: &AllocationState,
    b_tot: u32,
    ue_tables: &mut HashMap<(usize, Vec<usize>, u64), UeTable>,
) -> Result<Option<(f64, FeedbackPlan)>> {
    let snapshot = ProcessingSnapshot::new(net.config, state);
    let num_n = state.num_subcarriers();
    let bt = b_tot as usize;
    // Per subcarrier: best λ_n and cell budgets for every budget b.
    let mut per_n: Vec<Vec<Option<CellBudgets>>> = Vec::with_capacity(num_n);
    let mut links_n = Vec::with_capacity(num_n);
    for n in 0..num_n {
        let links = state.links(net.topology, n);
        let active: Vec<usize> = links.iter().map(|&(c, _)| c).collect();
        let mut tables = Vec::with_capacity(links.len());
        for &(c, u) in &links {
            let key = (u, active.clone(), snapshot.share(c).to_bits());
            if !ue_tables.contains_key(&key) {
                let mut t = Vec::with_capacity(bt + 1);
                for b in 0..=b_tot {
                    let mut top: Option<(f64, Vec<u32>)> = None;
                    for split in compositions(b, active.len()) {
                        let v = net.utility(u, c, &active, &split, &snapshot)?;
                        if top.as_ref().is_none_or(|(tv, _)| v > *tv) {
                            top = Some((v, split));
                        }
                    }
                    t.push(top.expect("at least one composition"));
                }
                ue_tables.insert(key.clone(), t);
            }
            tables.push(key);
        }
        let mut row = Vec::with_capacity(bt + 1);
        for b in 0..=b_tot {
            let mut top: Option<(f64, Vec<u32>)> = None;
            for budgets in compositions(b, links.len()) {
                let v: f64 = links
                    .iter()
                    .zip(&budgets)
                    .zip(&tables)
                    .map(|((&(c, _), &bc), key)| net.weight(c) * ue_tables[key][bc as usize].0)
                    .sum();
                if top.as_ref().is_none_or(|(tv, _)| v > *tv) {
                    top = Some((v, budgets));
                }
            }
            row.push(top);
        }
        per_n.push(row);
        links_n.push((links, active, tables));
    }
    let mut top: Option<(f64, Vec<u32>)> = None;
    for budgets in compositions(b_tot, num_n) {
        let mut total = 0.0;
        let mut feasible = true;
        for (n, &b) in budgets.iter().enumerate() {
            match &per_n[n][b as usize] {
                Some((v, _)) => total += v,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible && top.as_ref().is_none_or(|(tv, _)| total > *tv) {
            top = Some((total, budgets));
        }
    }
    let Some((value, budgets)) = top else {
        return Ok(None);
    };
    let mut plan = FeedbackPlan::zero(state.num_ue(), state.num_bs(), num_n);
    for (n, &b) in budgets.iter().enumerate() {
        let (links, active, tables) = &links_n[n];
        let (_, cell_budgets) = per_n[n][b as usize].as_ref().expect("feasible");
        for ((&(c, u), &bc), key) in links.iter().zip(cell_budgets).zip(tables) {
            plan.set_link(n, c, u, active, &ue_tables[key][bc as usize].1);
        }
        plan.subcarrier_budgets[n] = b;
    }
    Ok(Some((value, plan)))
}
