//! Deployment planner: reward-only UCT whose expansions are filtered by the
//! ensemble critic.

use std::sync::Arc;

use super::prune::{expand_with_pruning, PruneDecision};
use crate::cmdp::{CmdpError, Decision, Environment, Planner, StepOutcome};
use crate::critic::CriticEnsemble;
use crate::mcts::{best_action, search, NodeId, PlannerConfig, PlannerConfigError, SearchHooks, SearchTree};
use crate::rng::PlannerRng;

struct CriticHooks<'a> {
    ensemble: &'a CriticEnsemble,
    c_hat: f64,
    slack: f64,
    log: Option<&'a mut Vec<Vec<PruneDecision>>>,
}

impl<E: Environment> SearchHooks<E> for CriticHooks<'_> {
    fn lambda(&self) -> f64 {
        0.0
    }

    fn track_cost(&self) -> bool {
        false
    }

    fn expand(&mut self, tree: &mut SearchTree<E::State>, node: NodeId, state: &E::State, path_costs: &[f64], model: &E) {
        let features = model.features(state);
        let decisions = expand_with_pruning(tree, node, &features, path_costs, self.ensemble, self.c_hat, self.slack);
        if let Some(log) = self.log.as_deref_mut() {
            log.push(decisions);
        }
    }
}

/// One C-MCTS decision. `prune_log`, when given, receives the decisions of
/// every expansion in order.
#[allow(clippy::too_many_arguments)]
pub fn plan_cmcts<E: Environment>(
    root: &E::State,
    model: &E,
    ensemble: &CriticEnsemble,
    config: &PlannerConfig,
    c_hat: f64,
    slack: f64,
    rng: &mut PlannerRng,
    prune_log: Option<&mut Vec<Vec<PruneDecision>>>,
) -> (Decision, SearchTree<E::State>) {
    let mut hooks = CriticHooks { ensemble, c_hat, slack, log: prune_log };
    let tree = search(model, root, &config.search_params(), &mut hooks, rng);
    let action = best_action(&tree, 0.0, &mut rng.tie_break).unwrap_or(0);
    (Decision { action, peak_depth: tree.peak_depth() }, tree)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmctsConfig {
    pub planner: PlannerConfig,
    pub c_hat: f64,
    /// Margin added to ĉ before a trusted estimate counts as unsafe.
    pub prune_slack: f64,
    /// Shrink ĉ by each incurred cost, `ĉ ← (ĉ − c)/γ`, between decisions.
    pub track_budget: bool,
}

impl CmctsConfig {
    pub fn new(planner: PlannerConfig, c_hat: f64) -> Self {
        Self { planner, c_hat, prune_slack: 0.0, track_budget: true }
    }
}

#[derive(Debug, Clone)]
pub struct CmctsPlanner<E> {
    model: E,
    ensemble: Arc<CriticEnsemble>,
    config: CmctsConfig,
    budget: f64,
}

impl<E: Environment> CmctsPlanner<E> {
    pub fn new(model: E, ensemble: Arc<CriticEnsemble>, config: CmctsConfig) -> Result<Self, PlannerConfigError> {
        config.planner.validate()?;
        if !(config.c_hat >= 0.0) || !(config.prune_slack >= 0.0) {
            return Err(PlannerConfigError(format!("invalid C-MCTS settings {config:?}")));
        }
        ensemble
            .check_compatible(&model.encoder_id(), model.feature_len(), model.num_actions())
            .map_err(|e| PlannerConfigError(e.to_string()))?;
        let budget = config.c_hat;
        Ok(Self { model, ensemble, config, budget })
    }

    pub fn ensemble(&self) -> &CriticEnsemble {
        &self.ensemble
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

impl<E: Environment> Planner<E::State> for CmctsPlanner<E> {
    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn plan(&mut self, state: &E::State, rng: &mut PlannerRng) -> Result<Decision, CmdpError> {
        let (decision, _) = plan_cmcts(
            state,
            &self.model,
            &self.ensemble,
            &self.config.planner,
            self.budget,
            self.config.prune_slack,
            rng,
            None,
        );
        Ok(decision)
    }

    fn observe(&mut self, _action: usize, outcome: &StepOutcome<E::State>) {
        if self.config.track_budget {
            self.budget = ((self.budget - outcome.cost) / self.config.planner.gamma).max(0.0);
        }
    }

    fn reset(&mut self) {
        self.budget = self.config.c_hat;
    }
}
