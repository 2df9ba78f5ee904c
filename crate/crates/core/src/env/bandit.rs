//! One-step deterministic bandit: each arm pays a fixed reward and cost and ends the episode.

use crate::cmdp::{Environment, StepOutcome};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct Bandit {
    /// `(reward, cost)` per arm.
    pub arms: Vec<(f64, f64)>,
}

impl Bandit {
    pub fn new(arms: Vec<(f64, f64)>) -> Self {
        assert!(!arms.is_empty(), "bandit needs at least one arm");
        Self { arms }
    }
}

impl Environment for Bandit {
    /// `false` before the pull, `true` after.
    type State = bool;

    fn num_actions(&self) -> usize {
        self.arms.len()
    }

    fn initial_state(&self, _rng: &mut SimRng) -> bool {
        false
    }

    fn step(&self, _state: &bool, action: usize, _rng: &mut SimRng) -> StepOutcome<bool> {
        let (reward, cost) = self.arms[action];
        StepOutcome { reward, cost, next_state: true, terminal: true }
    }

    fn is_terminal(&self, state: &bool) -> bool {
        *state
    }

    fn features(&self, state: &bool) -> Vec<f64> {
        vec![if *state { 1.0 } else { 0.0 }]
    }

    fn feature_len(&self) -> usize {
        1
    }

    fn encoder_id(&self) -> String {
        format!("bandit-v1:{}", self.arms.len())
    }
}
