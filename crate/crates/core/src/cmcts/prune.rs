//! Critic-gated expansion: trusted predictions whose total discounted cost
//! from the root exceeds the constraint are not expanded.

use crate::critic::{CriticEnsemble, Prediction};
use crate::mcts::{NodeId, SearchTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneStatus {
    Expanded,
    PrunedUnsafe,
    /// Every action was unsafe; this one had the lowest estimate and is kept
    /// so the search can continue.
    TrustedUnsafeFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneDecision {
    pub action: usize,
    pub status: PruneStatus,
    pub mu: f64,
    pub sigma: f64,
    pub v_c: f64,
}

/// `Σ_{k<D} γ^k·path_costs[k] + γ^D·mu` with `D = path_costs.len()`.
pub fn total_cost_estimate(path_costs: &[f64], gamma: f64, mu: f64) -> f64 {
    let mut total = 0.0;
    let mut discount = 1.0;
    for c in path_costs {
        total += discount * c;
        discount *= gamma;
    }
    total + discount * mu
}

/// Classifies every action at a leaf reached by paying `path_costs`.
/// An action is pruned iff `sigma ≤ sigma_max` and `v_c > c_hat + slack`.
pub fn prune_decisions(
    predictions: &[Prediction],
    path_costs: &[f64],
    gamma: f64,
    sigma_max: f64,
    c_hat: f64,
    slack: f64,
) -> Vec<PruneDecision> {
    let mut decisions: Vec<PruneDecision> = predictions
        .iter()
        .enumerate()
        .map(|(action, p)| {
            let v_c = total_cost_estimate(path_costs, gamma, p.mu);
            let status = if p.sigma <= sigma_max && v_c > c_hat + slack {
                PruneStatus::PrunedUnsafe
            } else {
                PruneStatus::Expanded
            };
            PruneDecision { action, status, mu: p.mu, sigma: p.sigma, v_c }
        })
        .collect();
    if !decisions.is_empty() && decisions.iter().all(|d| d.status == PruneStatus::PrunedUnsafe) {
        let best = decisions
            .iter()
            .enumerate()
            .fold(0, |best, (i, d)| if d.v_c < decisions[best].v_c { i } else { best });
        decisions[best].status = PruneStatus::TrustedUnsafeFallback;
    }
    decisions
}

/// Predicts at `features`, classifies the actions and expands `node` with the
/// survivors.
#[allow(clippy::too_many_arguments)]
pub fn expand_with_pruning<S>(
    tree: &mut SearchTree<S>,
    node: NodeId,
    features: &[f64],
    path_costs: &[f64],
    ensemble: &CriticEnsemble,
    c_hat: f64,
    slack: f64,
) -> Vec<PruneDecision> {
    let predictions = ensemble.predict(features);
    let decisions = prune_decisions(&predictions, path_costs, tree.gamma(), ensemble.sigma_max(), c_hat, slack);
    let (mut keep, mut pruned) = (Vec::new(), Vec::new());
    for d in &decisions {
        if d.status == PruneStatus::PrunedUnsafe {
            pruned.push(d.action);
        } else {
            keep.push(d.action);
        }
    }
    tree.expand(node, &keep, &pruned);
    decisions
}
