//! CC-MCP: scalarized tree search whose Lagrange multiplier is updated after
//! every planning iteration from the root's Monte Carlo cost estimate.

use crate::cmdp::{CmdpError, Decision, Environment, Planner, StepOutcome};
use crate::mcts::{
    child_stats, robust_choice, search, PlannerConfig, PlannerConfigError, SearchHooks, SearchTree,
    ROOT,
};
use crate::rng::PlannerRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeState {
    pub lambda: f64,
    /// 1-based index of the next update.
    pub iteration: u64,
    pub step_size_base: f64,
    pub lambda_max: f64,
}

impl LagrangeState {
    pub fn new(lambda: f64, step_size_base: f64, lambda_max: f64) -> Self {
        Self { lambda: lambda.clamp(0.0, lambda_max), iteration: 1, step_size_base, lambda_max }
    }

    pub fn step_size(&self) -> f64 {
        self.step_size_base / (self.iteration as f64).sqrt()
    }
}

/// Projected subgradient step `λ ← clamp(λ + η_i·(V̂_C − ĉ), 0, λ_max)`, `η_i = η₀/√i`.
pub fn ccmcp_lambda_update(ls: &LagrangeState, root_cost_estimate: f64, c_hat: f64) -> LagrangeState {
    let lambda = (ls.lambda + ls.step_size() * (root_cost_estimate - c_hat)).clamp(0.0, ls.lambda_max);
    LagrangeState { lambda, iteration: ls.iteration + 1, ..*ls }
}

/// How the executed action is picked from the finished tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalAction {
    /// Most visited root action.
    MaxVisits,
    /// Most visited among root actions whose cost estimate is within the
    /// remaining budget; all actions if none is.
    FeasibleMaxVisits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcmcpConfig {
    pub step_size_base: f64,
    pub lambda_max: f64,
    pub lambda_init: f64,
    /// Shrink ĉ by each incurred cost, `ĉ ← (ĉ − c)/γ`, between decisions.
    pub track_budget: bool,
    pub final_action: FinalAction,
}

impl Default for CcmcpConfig {
    fn default() -> Self {
        Self {
            step_size_base: 1.0,
            lambda_max: 100.0,
            lambda_init: 0.0,
            track_budget: true,
            final_action: FinalAction::FeasibleMaxVisits,
        }
    }
}

struct CcmcpHooks<'a> {
    ls: &'a mut LagrangeState,
    c_hat: f64,
    trace: Option<&'a mut Vec<f64>>,
}

impl<E: Environment> SearchHooks<E> for CcmcpHooks<'_> {
    fn lambda(&self) -> f64 {
        self.ls.lambda
    }

    fn after_iteration(&mut self, tree: &SearchTree<E::State>) {
        let estimate = tree.root().mean_cost().unwrap_or(0.0);
        *self.ls = ccmcp_lambda_update(self.ls, estimate, self.c_hat);
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(self.ls.lambda);
        }
    }
}

/// One CC-MCP decision. `ls` carries λ across decisions; `lambda_trace`, when
/// given, receives λ after every iteration.
pub fn plan_ccmcp<E: Environment>(
    root: &E::State,
    model: &E,
    config: &PlannerConfig,
    ccmcp: &CcmcpConfig,
    c_hat: f64,
    ls: &mut LagrangeState,
    rng: &mut PlannerRng,
    lambda_trace: Option<&mut Vec<f64>>,
) -> (Decision, SearchTree<E::State>) {
    let mut hooks = CcmcpHooks { ls, c_hat, trace: lambda_trace };
    let tree = search(model, root, &config.search_params(), &mut hooks, rng);
    let lambda = hooks.ls.lambda;
    let mut stats = child_stats(&tree, ROOT, lambda);
    if ccmcp.final_action == FinalAction::FeasibleMaxVisits {
        let gamma = tree.gamma();
        let feasible: Vec<_> = stats
            .iter()
            .copied()
            .filter(|s| {
                let child = tree.child(ROOT, s.action).expect("root child");
                tree.node(child).action_cost(gamma).is_some_and(|c| c <= c_hat)
            })
            .collect();
        if !feasible.is_empty() {
            stats = feasible;
        }
    }
    let action = robust_choice(&stats, &mut rng.tie_break).unwrap_or(0);
    (Decision { action, peak_depth: tree.peak_depth() }, tree)
}

#[derive(Debug, Clone)]
pub struct CcmcpPlanner<E> {
    model: E,
    config: PlannerConfig,
    ccmcp: CcmcpConfig,
    c_hat: f64,
    budget: f64,
    ls: LagrangeState,
}

impl<E: Environment> CcmcpPlanner<E> {
    pub fn new(
        model: E,
        config: PlannerConfig,
        ccmcp: CcmcpConfig,
        c_hat: f64,
    ) -> Result<Self, PlannerConfigError> {
        config.validate()?;
        if !(ccmcp.step_size_base > 0.0) || !(ccmcp.lambda_max > 0.0) || !(ccmcp.lambda_init >= 0.0) {
            return Err(PlannerConfigError(format!("invalid CC-MCP settings {ccmcp:?}")));
        }
        let ls = LagrangeState::new(ccmcp.lambda_init, ccmcp.step_size_base, ccmcp.lambda_max);
        Ok(Self { model, config, ccmcp, c_hat, budget: c_hat, ls })
    }

    pub fn lagrange(&self) -> &LagrangeState {
        &self.ls
    }

    /// Constraint used for the next decision.
    pub fn budget(&self) -> f64 {
        self.budget
    }
}

impl<E: Environment> Planner<E::State> for CcmcpPlanner<E> {
    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn plan(&mut self, state: &E::State, rng: &mut PlannerRng) -> Result<Decision, CmdpError> {
        let (decision, _) = plan_ccmcp(
            state,
            &self.model,
            &self.config,
            &self.ccmcp,
            self.budget,
            &mut self.ls,
            rng,
            None,
        );
        Ok(decision)
    }

    fn observe(&mut self, _action: usize, outcome: &StepOutcome<E::State>) {
        if self.ccmcp.track_budget {
            self.budget = ((self.budget - outcome.cost) / self.config.gamma).max(0.0);
        }
    }

    fn reset(&mut self) {
        self.ls = LagrangeState::new(self.ccmcp.lambda_init, self.ccmcp.step_size_base, self.ccmcp.lambda_max);
        self.budget = self.c_hat;
    }
}
