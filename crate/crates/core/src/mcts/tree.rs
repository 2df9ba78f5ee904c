//! Arena-backed search tree with separate reward and cost statistics.
//!
//! Every node keeps the discounted return-to-go sums *as seen from that node*
//! plus the per-visit sums of the one-step reward and cost on the edge that
//! leads into it. The value of taking action `a` at the parent is then
//! `(edge_r + γ·G_r − λ·(edge_c + γ·G_c)) / N`, so the scalarization weight
//! can change between iterations without touching stored statistics.

pub type NodeId = usize;
pub const ROOT: NodeId = 0;

#[derive(Debug, Clone)]
pub struct SearchNode<S> {
    /// Snapshot taken the first time the edge into this node was traversed.
    pub state: Option<S>,
    pub visits: u32,
    pub reward_sum: f64,
    pub cost_sum: f64,
    pub edge_reward_sum: f64,
    pub edge_cost_sum: f64,
    /// One-step reward/cost observed on the first traversal.
    pub edge_reward: f64,
    pub edge_cost: f64,
    pub depth: usize,
    pub action: Option<usize>,
    pub terminal: bool,
    pub expanded: bool,
    /// Expanded children as `(action, node)`, in action order.
    pub children: Vec<(usize, NodeId)>,
    pub pruned: Vec<usize>,
}

impl<S> SearchNode<S> {
    fn new(state: Option<S>, depth: usize, action: Option<usize>) -> Self {
        Self {
            state,
            visits: 0,
            reward_sum: 0.0,
            cost_sum: 0.0,
            edge_reward_sum: 0.0,
            edge_cost_sum: 0.0,
            edge_reward: 0.0,
            edge_cost: 0.0,
            depth,
            action,
            terminal: false,
            expanded: false,
            children: Vec::new(),
            pruned: Vec::new(),
        }
    }

    /// Scalarized mean return-to-go from this node, W/N.
    pub fn mean_value(&self, lambda: f64) -> Option<f64> {
        (self.visits > 0).then(|| (self.reward_sum - lambda * self.cost_sum) / self.visits as f64)
    }

    pub fn mean_cost(&self) -> Option<f64> {
        (self.visits > 0).then(|| self.cost_sum / self.visits as f64)
    }

    /// Scalarized value of the action leading into this node.
    pub fn action_value(&self, lambda: f64, gamma: f64) -> Option<f64> {
        (self.visits > 0).then(|| {
            let r = self.edge_reward_sum + gamma * self.reward_sum;
            let c = self.edge_cost_sum + gamma * self.cost_sum;
            (r - lambda * c) / self.visits as f64
        })
    }

    /// Mean discounted cost of the action leading into this node.
    pub fn action_cost(&self, gamma: f64) -> Option<f64> {
        (self.visits > 0)
            .then(|| (self.edge_cost_sum + gamma * self.cost_sum) / self.visits as f64)
    }

    pub fn is_leaf(&self) -> bool {
        !self.expanded
    }
}

/// Running min/max of backed-up action values, used to map values to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxStats {
    min: f64,
    max: f64,
}

impl Default for MinMaxStats {
    fn default() -> Self {
        Self { min: f64::INFINITY, max: f64::NEG_INFINITY }
    }
}

impl MinMaxStats {
    pub fn update(&mut self, value: f64) {
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    /// Identity until a non-degenerate range has been seen.
    pub fn normalize(&self, value: f64) -> f64 {
        if self.max > self.min {
            (value - self.min) / (self.max - self.min)
        } else {
            value
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchTree<S> {
    nodes: Vec<SearchNode<S>>,
    gamma: f64,
    pub bounds: MinMaxStats,
    peak_depth: usize,
}

impl<S> SearchTree<S> {
    pub fn new(root_state: S, gamma: f64) -> Self {
        Self {
            nodes: vec![SearchNode::new(Some(root_state), 0, None)],
            gamma,
            bounds: MinMaxStats::default(),
            peak_depth: 0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn node(&self, id: NodeId) -> &SearchNode<S> {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode<S> {
        &mut self.nodes[id]
    }

    pub fn root(&self) -> &SearchNode<S> {
        &self.nodes[ROOT]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SearchNode<S>] {
        &self.nodes
    }

    pub fn child(&self, node: NodeId, action: usize) -> Option<NodeId> {
        self.nodes[node].children.iter().find(|(a, _)| *a == action).map(|(_, c)| *c)
    }

    /// Creates children for `actions` and records `pruned` as never expandable.
    pub fn expand(&mut self, node: NodeId, actions: &[usize], pruned: &[usize]) {
        let depth = self.nodes[node].depth + 1;
        let mut children = Vec::with_capacity(actions.len());
        for &a in actions {
            let id = self.nodes.len();
            self.nodes.push(SearchNode::new(None, depth, Some(a)));
            children.push((a, id));
        }
        children.sort_by_key(|(a, _)| *a);
        if !actions.is_empty() {
            self.peak_depth = self.peak_depth.max(depth);
        }
        let n = &mut self.nodes[node];
        n.children = children;
        n.pruned = pruned.to_vec();
        n.expanded = true;
    }

    /// Maximum depth over all nodes created in this tree.
    pub fn peak_depth(&self) -> usize {
        self.peak_depth
    }

    /// Propagates a leaf estimate up `path` (root first).
    ///
    /// `edge_rewards[k]`/`edge_costs[k]` are the one-step values on the edge
    /// into `path[k + 1]`. Each node receives the discounted return-to-go as
    /// seen from itself. With `track_cost` off, cost statistics stay zero.
    #[allow(clippy::too_many_arguments)]
    pub fn backup(
        &mut self,
        path: &[NodeId],
        edge_rewards: &[f64],
        edge_costs: &[f64],
        leaf_reward: f64,
        leaf_cost: f64,
        lambda: f64,
        track_cost: bool,
    ) {
        debug_assert_eq!(path.len(), edge_rewards.len() + 1);
        debug_assert_eq!(edge_rewards.len(), edge_costs.len());
        let gamma = self.gamma;
        let mut g_r = leaf_reward;
        let mut g_c = if track_cost { leaf_cost } else { 0.0 };
        for k in (0..path.len()).rev() {
            let node = &mut self.nodes[path[k]];
            node.visits += 1;
            node.reward_sum += g_r;
            node.cost_sum += g_c;
            if k > 0 {
                let r = edge_rewards[k - 1];
                let c = if track_cost { edge_costs[k - 1] } else { 0.0 };
                node.edge_reward_sum += r;
                node.edge_cost_sum += c;
                g_r = r + gamma * g_r;
                g_c = c + gamma * g_c;
                let q = node.action_value(lambda, gamma).expect("visited");
                self.bounds.update(q);
            }
        }
    }
}
