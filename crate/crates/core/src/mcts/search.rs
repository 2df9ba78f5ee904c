//! The select → expand → rollout → backup loop shared by all planners.
//!
//! Transitions inside the tree are open loop: children are keyed on the
//! action only and every traversal re-samples the edge from the model, so a
//! stochastic edge sees a fresh successor state each time.

use super::select::select_child;
use super::tree::{NodeId, SearchTree, ROOT};
use crate::cmdp::Environment;
use crate::rng::{PlannerRng, SimRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub iterations: usize,
    pub uct_c: f64,
    pub rollout_depth_max: usize,
    pub gamma: f64,
}

/// Planner-specific behaviour plugged into [`search`].
pub trait SearchHooks<E: Environment> {
    /// Scalarization weight for the coming iteration.
    fn lambda(&self) -> f64;

    /// Whether cost statistics are backed up.
    fn track_cost(&self) -> bool {
        true
    }

    /// Expands `node`, reached in `state` after paying `path_costs` from the root.
    fn expand(
        &mut self,
        tree: &mut SearchTree<E::State>,
        node: NodeId,
        _state: &E::State,
        _path_costs: &[f64],
        model: &E,
    ) {
        let actions: Vec<usize> = (0..model.num_actions()).collect();
        tree.expand(node, &actions, &[]);
    }

    fn after_iteration(&mut self, _tree: &SearchTree<E::State>) {}
}

/// Simulates the model's rollout policy from `state`; returns discounted (reward, cost).
pub fn rollout<E: Environment>(
    state: &E::State,
    model: &E,
    gamma: f64,
    depth_max: usize,
    rng: &mut SimRng,
) -> (f64, f64) {
    let mut reward = 0.0;
    let mut cost = 0.0;
    let mut discount = 1.0;
    if model.is_terminal(state) {
        return (0.0, 0.0);
    }
    let mut current = state.clone();
    for _ in 0..depth_max {
        let action = model.rollout_action(&current, rng);
        let out = model.step(&current, action, rng);
        reward += discount * out.reward;
        cost += discount * out.cost;
        discount *= gamma;
        if out.terminal {
            break;
        }
        current = out.next_state;
    }
    (reward, cost)
}

/// Builds a search tree from `root` for `params.iterations` iterations.
pub fn search<E, H>(
    model: &E,
    root: &E::State,
    params: &SearchParams,
    hooks: &mut H,
    rng: &mut PlannerRng,
) -> SearchTree<E::State>
where
    E: Environment,
    H: SearchHooks<E>,
{
    let mut tree = SearchTree::new(root.clone(), params.gamma);
    if model.is_terminal(root) {
        return tree;
    }
    hooks.expand(&mut tree, ROOT, root, &[], model);

    let mut path = Vec::new();
    let mut rewards = Vec::new();
    let mut costs = Vec::new();
    for _ in 0..params.iterations {
        path.clear();
        rewards.clear();
        costs.clear();
        path.push(ROOT);
        let lambda = hooks.lambda();
        let mut state = root.clone();
        let mut node = ROOT;
        let mut terminal = false;

        while tree.node(node).expanded {
            let Some(action) = select_child(&tree, node, params.uct_c, lambda, &mut rng.tie_break) else {
                break;
            };
            let child = tree.child(node, action).expect("selected child exists");
            let out = model.step(&state, action, &mut rng.rollout);
            let first_visit = tree.node(child).state.is_none();
            let c = tree.node_mut(child);
            if first_visit {
                c.state = Some(out.next_state.clone());
                c.edge_reward = out.reward;
                c.edge_cost = out.cost;
            }
            c.terminal = out.terminal;
            rewards.push(out.reward);
            costs.push(out.cost);
            path.push(child);
            node = child;
            state = out.next_state;
            if out.terminal {
                terminal = true;
                break;
            }
        }

        let (leaf_r, leaf_c) = if terminal {
            (0.0, 0.0)
        } else {
            if !tree.node(node).expanded {
                hooks.expand(&mut tree, node, &state, &costs, model);
            }
            rollout(&state, model, params.gamma, params.rollout_depth_max, &mut rng.rollout)
        };
        tree.backup(&path, &rewards, &costs, leaf_r, leaf_c, lambda, hooks.track_cost());
        hooks.after_iteration(&tree);
    }
    tree
}
