//! Critic-pruned tree search and the offline training phase that produces
//! its critic.

pub mod planner;
pub mod prune;
pub mod training;

pub use planner::{plan_cmcts, CmctsConfig, CmctsPlanner};
pub use prune::{expand_with_pruning, prune_decisions, total_cost_estimate, PruneDecision, PruneStatus};
pub use training::{
    bounded_lambda_update, collect_phase, lambda_schedule_update, training_loop, training_loop_observed, CollectResult, LoopRecord, TrainLoopConfig, TrainLoopError,
    TrainOutcome,
};
