use std::fmt;

use crate::scenario::ClusterTopology;

/// Subcarrier assignment `X` (UE × subcarrier) and BS activity `Y`
/// (BS × subcarrier).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationState {
    pub x: Vec<Vec<bool>>,
    pub y: Vec<Vec<bool>>,
}

impl AllocationState {
    pub fn empty(num_ue: usize, num_bs: usize, num_subcarriers: usize) -> Self {
        AllocationState {
            x: vec![vec![false; num_subcarriers]; num_ue],
            y: vec![vec![false; num_subcarriers]; num_bs],
        }
    }

    pub fn num_ue(&self) -> usize {
        self.x.len()
    }

    pub fn num_bs(&self) -> usize {
        self.y.len()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    /// `C^a_n`, ascending.
    pub fn active_set(&self, n: usize) -> Vec<usize> {
        (0..self.num_bs()).filter(|&c| self.y[c][n]).collect()
    }

    /// UEs of cell `c` scheduled on subcarrier `n`.
    pub fn scheduled_in(&self, topology: &ClusterTopology, c: usize, n: usize) -> Vec<usize> {
        topology.cells[c]
            .iter()
            .copied()
            .filter(|&u| self.x[u][n])
            .collect()
    }

    /// `(cell, UE)` for every active cell of subcarrier `n` that has exactly
    /// one scheduled UE, in cell order.
    pub fn links(&self, topology: &ClusterTopology, n: usize) -> Vec<(usize, usize)> {
        self.active_set(n)
            .into_iter()
            .filter_map(|c| match self.scheduled_in(topology, c, n).as_slice() {
                [u] => Some((c, *u)),
                _ => None,
            })
            .collect()
    }

    /// Number of subcarriers on which each BS is active.
    pub fn active_counts(&self) -> Vec<usize> {
        self.y
            .iter()
            .map(|row| row.iter().filter(|&&v| v).count())
            .collect()
    }

    /// Schedules `ue` of cell `c` on `n`, replacing whichever UE of the cell
    /// was there, and marks the BS active.
    pub fn schedule(&mut self, topology: &ClusterTopology, c: usize, n: usize, ue: usize) {
        for &u in &topology.cells[c] {
            self.x[u][n] = false;
        }
        self.x[ue][n] = true;
        self.y[c][n] = true;
    }

    /// Switches BS `c` off on `n` and unschedules its UEs there.
    pub fn deactivate(&mut self, topology: &ClusterTopology, c: usize, n: usize) {
        for &u in &topology.cells[c] {
            self.x[u][n] = false;
        }
        self.y[c][n] = false;
    }
}

/// Bit budgets at every level of the partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackPlan {
    /// `B_n`.
    pub subcarrier_budgets: Vec<u32>,
    /// `b_{c,n}`, indexed `[n][c]`.
    pub cell_budgets: Vec<Vec<u32>>,
    /// `B_n[u][c']`: bits UE `u` spends on its channel to BS `c'`.
    pub splits: Vec<Vec<Vec<u32>>>,
}

impl FeedbackPlan {
    pub fn zero(num_ue: usize, num_bs: usize, num_subcarriers: usize) -> Self {
        FeedbackPlan {
            subcarrier_budgets: vec![0; num_subcarriers],
            cell_budgets: vec![vec![0; num_bs]; num_subcarriers],
            splits: vec![vec![vec![0; num_bs]; num_ue]; num_subcarriers],
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.splits
            .iter()
            .flatten()
            .flatten()
            .map(|&b| b as u64)
            .sum()
    }

    pub fn subcarrier_bits(&self, n: usize) -> u64 {
        self.splits[n].iter().flatten().map(|&b| b as u64).sum()
    }

    /// Clears subcarrier `n`.
    pub fn clear(&mut self, n: usize) {
        self.subcarrier_budgets[n] = 0;
        self.cell_budgets[n].iter_mut().for_each(|b| *b = 0);
        self.splits[n].iter_mut().flatten().for_each(|b| *b = 0);
    }

    /// Records UE `ue` of cell `cell` spending `split[i]` bits on `active[i]`.
    pub fn set_link(&mut self, n: usize, cell: usize, ue: usize, active: &[usize], split: &[u32]) {
        let row = &mut self.splits[n][ue];
        row.iter_mut().for_each(|b| *b = 0);
        for (&c, &b) in active.iter().zip(split) {
            row[c] = b;
        }
        self.cell_budgets[n][cell] = split.iter().sum();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// More than one UE of a cell scheduled on an active (cell, subcarrier).
    C1 {
        bs: usize,
        subcarrier: usize,
        scheduled: usize,
    },
    /// More active BSs than exist in the cluster.
    C2 { subcarrier: usize, active: usize },
    /// Total allocated bits differ from the budget.
    C3 { allocated: u64, budget: u64 },
    /// Bits on a subcarrier differ from its budget `B_n`.
    SubcarrierBudget {
        subcarrier: usize,
        allocated: u64,
        budget: u32,
    },
    /// Cell budget differs from what its scheduled UE spends.
    CellBudget {
        subcarrier: usize,
        bs: usize,
        allocated: u64,
        budget: u32,
    },
    /// A UE is scheduled under an inactive BS.
    ScheduledUnderInactive {
        ue: usize,
        bs: usize,
        subcarrier: usize,
    },
    /// An active BS has no scheduled UE.
    IdleActive { bs: usize, subcarrier: usize },
    /// Bits assigned to a UE not scheduled on the subcarrier.
    BitsOffSchedule { ue: usize, subcarrier: usize },
    /// Bits assigned to the channel of an inactive BS.
    BitsToInactive {
        ue: usize,
        bs: usize,
        subcarrier: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Verifies scheduling, activity and bit-budget constraints; every violated
/// (constraint, index) pair is reported.
pub fn check_constraints(
    topology: &ClusterTopology,
    state: &AllocationState,
    plan: &FeedbackPlan,
    budget: u64,
) -> ConstraintReport {
    let mut v = Vec::new();
    let num_n = state.num_subcarriers();
    for n in 0..num_n {
        let active = state.active_set(n);
        if active.len() > state.num_bs() {
            v.push(Violation::C2 {
                subcarrier: n,
                active: active.len(),
            });
        }
        for c in 0..state.num_bs() {
            let scheduled = state.scheduled_in(topology, c, n);
            if state.y[c][n] {
                if scheduled.len() > 1 {
                    v.push(Violation::C1 {
                        bs: c,
                        subcarrier: n,
                        scheduled: scheduled.len(),
                    });
                }
                if scheduled.is_empty() {
                    v.push(Violation::IdleActive {
                        bs: c,
                        subcarrier: n,
                    });
                }
                let spent: u64 = scheduled
                    .iter()
                    .map(|&u| plan.splits[n][u].iter().map(|&b| b as u64).sum::<u64>())
                    .sum();
                if spent != plan.cell_budgets[n][c] as u64 {
                    v.push(Violation::CellBudget {
                        subcarrier: n,
                        bs: c,
                        allocated: spent,
                        budget: plan.cell_budgets[n][c],
                    });
                }
            } else {
                for &u in &scheduled {
                    v.push(Violation::ScheduledUnderInactive {
                        ue: u,
                        bs: c,
                        subcarrier: n,
                    });
                }
            }
        }
        for u in 0..state.num_ue() {
            let row = &plan.splits[n][u];
            if !state.x[u][n] {
                if row.iter().any(|&b| b > 0) {
                    v.push(Violation::BitsOffSchedule {
                        ue: u,
                        subcarrier: n,
                    });
                }
                continue;
            }
            for (c, &b) in row.iter().enumerate() {
                if b > 0 && !state.y[c][n] {
                    v.push(Violation::BitsToInactive {
                        ue: u,
                        bs: c,
                        subcarrier: n,
                    });
                }
            }
        }
        let on_n = plan.subcarrier_bits(n);
        if on_n != plan.subcarrier_budgets[n] as u64 {
            v.push(Violation::SubcarrierBudget {
                subcarrier: n,
                allocated: on_n,
                budget: plan.subcarrier_budgets[n],
            });
        }
    }
    let total = plan.total_bits();
    if total != budget {
        v.push(Violation::C3 {
            allocated: total,
            budget,
        });
    }
    ConstraintReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{place_network, ScenarioConfig};

    fn topo() -> ClusterTopology {
        let mut c = ScenarioConfig::desk();
        c.num_ue = 6;
        c.num_subcarriers = 2;
        place_network(&c, 4).unwrap()
    }

    #[test]
    fn vacuous_zero_state() {
        let t = topo();
        let s = AllocationState::empty(6, 3, 2);
        let p = FeedbackPlan::zero(6, 3, 2);
        assert!(check_constraints(&t, &s, &p, 0).is_ok());
    }

    #[test]
    fn two_ues_in_one_cell_violate_c1() {
        let t = topo();
        let (c, members) = t
            .cells
            .iter()
            .enumerate()
            .find(|(_, m)| m.len() >= 2)
            .map(|(c, m)| (c, m.clone()))
            .unwrap();
        let mut s = AllocationState::empty(6, 3, 2);
        s.y[c][1] = true;
        s.x[members[0]][1] = true;
        s.x[members[1]][1] = true;
        let p = FeedbackPlan::zero(6, 3, 2);
        let r = check_constraints(&t, &s, &p, 0);
        assert!(r.violations.contains(&Violation::C1 {
            bs: c,
            subcarrier: 1,
            scheduled: 2
        }));
    }

    #[test]
    fn short_budget_violates_c3() {
        let t = topo();
        let c = (0..3).find(|&c| !t.cells[c].is_empty()).unwrap();
        let u = t.cells[c][0];
        let mut s = AllocationState::empty(6, 3, 2);
        s.schedule(&t, c, 0, u);
        let mut p = FeedbackPlan::zero(6, 3, 2);
        p.set_link(0, c, u, &[c], &[4]);
        p.subcarrier_budgets[0] = 4;
        assert!(check_constraints(&t, &s, &p, 4).is_ok());
        let r = check_constraints(&t, &s, &p, 5);
        assert_eq!(
            r.violations,
            vec![Violation::C3 {
                allocated: 4,
                budget: 5
            }]
        );
    }

    #[test]
    fn consistency_rules() {
        let t = topo();
        let c = (0..3).find(|&c| !t.cells[c].is_empty()).unwrap();
        let u = t.cells[c][0];
        let mut s = AllocationState::empty(6, 3, 2);
        s.x[u][0] = true;
        let other = (c + 1) % 3;
        s.y[other][1] = true;
        let mut p = FeedbackPlan::zero(6, 3, 2);
        p.splits[1][u][c] = 1;
        p.subcarrier_budgets[1] = 1;
        let r = check_constraints(&t, &s, &p, 1);
        assert!(r.violations.contains(&Violation::ScheduledUnderInactive {
            ue: u,
            bs: c,
            subcarrier: 0
        }));
        assert!(r.violations.contains(&Violation::IdleActive {
            bs: other,
            subcarrier: 1
        }));
        assert!(r.violations.contains(&Violation::BitsOffSchedule {
            ue: u,
            subcarrier: 1
        }));
    }
}
