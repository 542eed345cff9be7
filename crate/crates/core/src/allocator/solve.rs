use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bsa::c_bsa;
use super::greedy::gfbp;
use super::network::{Network, Strategy};
use super::state::{check_constraints, AllocationState, FeedbackPlan};
use crate::kernels::UtilityKind;
use crate::scenario::{ClusterTopology, ScenarioConfig};
use crate::Result;

/// Knobs of the outer iteration; defaults come from the scenario config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub kind: UtilityKind,
    pub strategy: Strategy,
    /// Stop once `|λ_B[t-1] - λ_X[t]| <= epsilon`; `f64::INFINITY` stops after one pass.
    pub epsilon: f64,
    pub max_iters: usize,
    pub iota: u32,
    pub seed: u64,
}

impl SolveOptions {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        SolveOptions {
            kind: config.utility_kind,
            strategy: Strategy::Opt,
            epsilon: config.epsilon,
            max_iters: config.max_iters,
            iota: config.iota,
            seed: config.rng_seed,
        }
    }
}

/// Utility bookkeeping of one solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UtilityLedger {
    /// Final `λ_n`.
    pub lambda_n: Vec<f64>,
    /// Final `λ = Σ_n λ_n`.
    pub lambda: f64,
    /// `λ_B[t]` after each bit partition, `t = 0, 1, ...`.
    pub lambda_b: Vec<f64>,
    /// `λ_X[t]` after each scheduling pass; element `i` is `λ_X[i + 1]`.
    pub lambda_x: Vec<f64>,
    /// Whether every constraint held after each phase, in execution order.
    pub phase_checks: Vec<bool>,
    /// Greedy traces recorded during the run, for monotonicity audits.
    pub greedy_traces: Vec<Vec<f64>>,
}

impl UtilityLedger {
    pub fn iterations(&self) -> usize {
        self.lambda_x.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub state: AllocationState,
    pub plan: FeedbackPlan,
    pub ledger: UtilityLedger,
}

/// Every BS with UEs active everywhere, one uniformly drawn UE per active cell.
pub fn random_schedule(
    topology: &ClusterTopology,
    num_subcarriers: usize,
    seed: u64,
) -> AllocationState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = AllocationState::empty(topology.num_ue(), topology.num_bs(), num_subcarriers);
    for n in 0..num_subcarriers {
        for (c, members) in topology.cells.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let u = members[rng.random_range(0..members.len())];
            state.schedule(topology, c, n, u);
        }
    }
    state
}

/// Alternates bit partitioning and scheduling until the utility settles.
pub fn solve_wsu(
    topology: &ClusterTopology,
    config: &ScenarioConfig,
    options: &SolveOptions,
) -> Result<Solution> {
    let net = Network::new(topology, config, options.kind, options.strategy);
    solve_with(&net, options)
}

/// As [`solve_wsu`], reusing an existing network and its caches.
pub fn solve_with(net: &Network, options: &SolveOptions) -> Result<Solution> {
    let config = net.config;
    let topology = net.topology;
    let budget = config.feedback_budget;
    let mut ledger = UtilityLedger::default();
    let mut state = random_schedule(topology, config.num_subcarriers, options.seed);
    let mut plan;
    loop {
        let fbp = gfbp(net, &state, budget, options.iota)?;
        ledger
            .phase_checks
            .push(check_constraints(topology, &state, &fbp.plan, budget as u64).is_ok());
        ledger.greedy_traces.push(fbp.trace.clone());
        ledger
            .greedy_traces
            .extend(fbp.cluster_traces.iter().cloned());
        ledger.lambda_b.push(fbp.lambda);
        plan = fbp.plan;

        let bsa = c_bsa(net, &state, &plan)?;
        ledger
            .phase_checks
            .push(check_constraints(topology, &bsa.state, &bsa.plan, budget as u64).is_ok());
        ledger.greedy_traces.extend(bsa.traces.iter().cloned());
        ledger.lambda_x.push(bsa.lambda);
        state = bsa.state;
        plan = bsa.plan;
        ledger.lambda = bsa.lambda;
        ledger.lambda_n = bsa.lambda_n;

        let t = ledger.lambda_x.len();
        let gap = (ledger.lambda_b[t - 1] - ledger.lambda_x[t - 1]).abs();
        if gap <= options.epsilon || options.epsilon.is_infinite() || t >= options.max_iters {
            break;
        }
    }
    Ok(Solution {
        state,
        plan,
        ledger,
    })
}
