//! Resource allocation: scheduling and BS activity constraints, greedy
//! feedback-bit partitioning, cluster-based scheduling with BS switch-off,
//! the alternating outer iteration, baselines and an exhaustive oracle.

mod baseline;
mod bsa;
mod exhaustive;
mod greedy;
mod network;
mod solve;
mod state;

pub use baseline::{baseline_equal, baseline_min_interference};
pub use bsa::{c_bsa, evaluate_plan, BsaResult};
pub use exhaustive::{exhaustive_optimum, search_space, ExhaustiveResult, MAX_CONFIGURATIONS};
pub use greedy::{c_ifbp, gfbp, u_ifbp, ClusterGreedy, ClusterSplit, FbpResult};
pub use network::{
    equal_shares, Network, ProcessingSnapshot, Strategy, UeSplit, MIN_INTERFERENCE_GAIN,
};
pub use solve::{random_schedule, solve_with, solve_wsu, Solution, SolveOptions, UtilityLedger};
pub use state::{check_constraints, AllocationState, ConstraintReport, FeedbackPlan, Violation};
