//! UCT search shared by the scalarized, CC-MCP and critic-pruned planners.

pub mod search;
pub mod select;
pub mod tree;
pub mod vanilla;

pub use search::{rollout, search, SearchHooks, SearchParams};
pub use select::{best_action, child_stats, robust_choice, select_child, uct_select, ChildStats};
pub use tree::{MinMaxStats, NodeId, SearchNode, SearchTree, ROOT};
pub use vanilla::{plan_vanilla, FixedLambda, MctsPlanner, PlannerConfig, PlannerConfigError};
