//! UCT child selection and final action choice.

use rand::Rng;

use super::tree::{MinMaxStats, NodeId, SearchTree};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChildStats {
    pub action: usize,
    pub visits: u32,
    /// Mean action value; ignored while `visits == 0`.
    pub value: f64,
}

/// UCT over `children`: unvisited first (random among them), otherwise
/// `Q_norm + c·sqrt(ln N_parent / N_child)` with ties going to the earlier child.
/// `None` when there is nothing to select.
pub fn uct_select(
    children: &[ChildStats],
    parent_visits: u32,
    uct_c: f64,
    bounds: Option<&MinMaxStats>,
    rng: &mut SimRng,
) -> Option<usize> {
    if children.is_empty() {
        return None;
    }
    let unvisited: Vec<usize> = children.iter().filter(|c| c.visits == 0).map(|c| c.action).collect();
    match unvisited.len() {
        0 => {}
        1 => return Some(unvisited[0]),
        n => return Some(unvisited[rng.gen_range(0..n)]),
    }
    let ln_n = (parent_visits.max(1) as f64).ln();
    let mut best: Option<(usize, f64)> = None;
    for c in children {
        let q = bounds.map_or(c.value, |b| b.normalize(c.value));
        let score = q + uct_c * (ln_n / c.visits as f64).sqrt();
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((c.action, score));
        }
    }
    best.map(|(a, _)| a)
}

pub fn child_stats<S>(tree: &SearchTree<S>, node: NodeId, lambda: f64) -> Vec<ChildStats> {
    let gamma = tree.gamma();
    tree.node(node)
        .children
        .iter()
        .map(|&(action, id)| {
            let child = tree.node(id);
            ChildStats {
                action,
                visits: child.visits,
                value: child.action_value(lambda, gamma).unwrap_or(0.0),
            }
        })
        .collect()
}

/// UCT selection at `node` with the tree's running value normalization.
pub fn select_child<S>(
    tree: &SearchTree<S>,
    node: NodeId,
    uct_c: f64,
    lambda: f64,
    rng: &mut SimRng,
) -> Option<usize> {
    let stats = child_stats(tree, node, lambda);
    uct_select(&stats, tree.node(node).visits, uct_c, Some(&tree.bounds), rng)
}

/// Most visited candidate; ties by higher value, then uniformly at random.
pub fn robust_choice(candidates: &[ChildStats], rng: &mut SimRng) -> Option<usize> {
    let max_visits = candidates.iter().map(|c| c.visits).max()?;
    let top: Vec<&ChildStats> = candidates.iter().filter(|c| c.visits == max_visits).collect();
    let best_value = top.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = top.iter().filter(|c| c.value >= best_value).map(|c| c.action).collect();
    match tied.len() {
        0 => None,
        1 => Some(tied[0]),
        n => Some(tied[rng.gen_range(0..n)]),
    }
}

/// Max-visit root action.
pub fn best_action<S>(tree: &SearchTree<S>, lambda: f64, rng: &mut SimRng) -> Option<usize> {
    robust_choice(&child_stats(tree, super::tree::ROOT, lambda), rng)
}
