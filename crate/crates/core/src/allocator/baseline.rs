//! Reference feedback partitions the greedy scheme is compared against.

use super::greedy::gfbp;
use super::network::{Network, Strategy};
use super::state::{AllocationState, FeedbackPlan};
use crate::kernels::UtilityKind;
use crate::scenario::{ClusterTopology, ScenarioConfig};
use crate::Result;

/// Equal shares at every level: subcarriers, cells, and each UE's BSs;
/// leftover bits go to the lowest indices.
pub fn baseline_equal(
    topology: &ClusterTopology,
    config: &ScenarioConfig,
    state: &AllocationState,
    b_tot: u32,
    kind: UtilityKind,
) -> Result<(FeedbackPlan, f64)> {
    let net = Network::new(topology, config, kind, Strategy::Equ);
    let r = gfbp(&net, state, b_tot, config.iota)?;
    Ok((r.plan, r.lambda))
}

/// Greedy subcarrier and cell partitions as in the optimized scheme, but
/// each UE splits its bits to greedily reduce residual interference.
pub fn baseline_min_interference(
    topology: &ClusterTopology,
    config: &ScenarioConfig,
    state: &AllocationState,
    b_tot: u32,
    kind: UtilityKind,
) -> Result<(FeedbackPlan, f64)> {
    let net = Network::new(topology, config, kind, Strategy::Min);
    let r = gfbp(&net, state, b_tot, config.iota)?;
    Ok((r.plan, r.lambda))
}
