//! Constrained MDP planning: environments, UCT search, a Lagrangian baseline
//! and a planner that prunes with a learned cost critic.

pub mod ccmcp;
pub mod cmcts;
pub mod cmdp;
pub mod critic;
pub mod env;
pub mod mcts;
pub mod rng;
