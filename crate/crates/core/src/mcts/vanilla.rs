//! Single-objective MCTS on the scalarized reward `r − λ·c` with a fixed λ.

use thiserror::Error;

use super::search::{search, SearchHooks, SearchParams};
use super::select::best_action;
use super::tree::SearchTree;
use crate::cmdp::{CmdpError, Decision, Environment, Planner};
use crate::rng::PlannerRng;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid planner config: {0}")]
pub struct PlannerConfigError(pub String);

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub iterations: usize,
    pub uct_c: f64,
    pub rollout_depth_max: usize,
    pub lambda: f64,
    pub gamma: f64,
}

impl PlannerConfig {
    pub fn new(gamma: f64) -> Self {
        Self {
            iterations: 1024,
            uct_c: std::f64::consts::SQRT_2,
            rollout_depth_max: 50,
            lambda: 0.0,
            gamma,
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<(), PlannerConfigError> {
        if self.iterations == 0 {
            return Err(PlannerConfigError("iterations must be positive".into()));
        }
        if !(self.uct_c > 0.0) {
            return Err(PlannerConfigError(format!("uct_c {} must be positive", self.uct_c)));
        }
        if self.rollout_depth_max == 0 {
            return Err(PlannerConfigError("rollout_depth_max must be positive".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(PlannerConfigError(format!("lambda {} must be non-negative", self.lambda)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(PlannerConfigError(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        Ok(())
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            iterations: self.iterations,
            uct_c: self.uct_c,
            rollout_depth_max: self.rollout_depth_max,
            gamma: self.gamma,
        }
    }
}

/// Hooks for a fixed scalarization weight.
#[derive(Debug, Clone, Copy)]
pub struct FixedLambda(pub f64);

impl<E: Environment> SearchHooks<E> for FixedLambda {
    fn lambda(&self) -> f64 {
        self.0
    }
}

/// Runs one search and returns the max-visit root action with the tree.
pub fn plan_vanilla<E: Environment>(
    root: &E::State,
    model: &E,
    config: &PlannerConfig,
    rng: &mut PlannerRng,
) -> (Decision, SearchTree<E::State>) {
    let tree = search(model, root, &config.search_params(), &mut FixedLambda(config.lambda), rng);
    let action = best_action(&tree, config.lambda, &mut rng.tie_break).unwrap_or(0);
    (Decision { action, peak_depth: tree.peak_depth() }, tree)
}

#[derive(Debug, Clone)]
pub struct MctsPlanner<E> {
    model: E,
    config: PlannerConfig,
}

impl<E: Environment> MctsPlanner<E> {
    pub fn new(model: E, config: PlannerConfig) -> Result<Self, PlannerConfigError> {
        config.validate()?;
        Ok(Self { model, config })
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }
}

impl<E: Environment> Planner<E::State> for MctsPlanner<E> {
    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn plan(&mut self, state: &E::State, rng: &mut PlannerRng) -> Result<Decision, CmdpError> {
        Ok(plan_vanilla(state, &self.model, &self.config, rng).0)
    }
}
