//! Environment-agnostic CMDP abstractions: the environment and planner
//! interfaces, discounted accounting and the episode driver.

use std::fmt::Debug;

use rand::Rng;
use thiserror::Error;

use crate::rng::{episode_seed, PlannerRng, RngStream, SimRng, StreamLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmdpError {
    #[error("invalid CMDP spec: {0}")]
    InvalidSpec(String),
    #[error("planner returned action {action} but the action space has {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("planner and environment disagree on action count ({planner} vs {environment})")]
    ActionSpaceMismatch { planner: usize, environment: usize },
    #[error("planner failed: {0}")]
    Planner(String),
}

/// Discount, cost constraints and sizes shared by an environment and its planners.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdpSpec {
    gamma: f64,
    cost_constraint: Vec<f64>,
    num_actions: usize,
    max_episode_steps: usize,
}

impl CmdpSpec {
    pub fn new(
        gamma: f64,
        cost_constraint: Vec<f64>,
        num_actions: usize,
        max_episode_steps: usize,
    ) -> Result<Self, CmdpError> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(CmdpError::InvalidSpec(format!("gamma {gamma} outside [0, 1)")));
        }
        if cost_constraint.is_empty() {
            return Err(CmdpError::InvalidSpec("at least one cost constraint is required".into()));
        }
        if let Some(c) = cost_constraint.iter().find(|c| !(**c >= 0.0)) {
            return Err(CmdpError::InvalidSpec(format!("cost constraint {c} is negative")));
        }
        if num_actions == 0 {
            return Err(CmdpError::InvalidSpec("num_actions must be positive".into()));
        }
        if max_episode_steps == 0 {
            return Err(CmdpError::InvalidSpec("max_episode_steps must be positive".into()));
        }
        Ok(Self { gamma, cost_constraint, num_actions, max_episode_steps })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cost_constraint(&self) -> &[f64] {
        &self.cost_constraint
    }

    /// The single constraint ĉ used by both shipped environments.
    pub fn c_hat(&self) -> f64 {
        self.cost_constraint[0]
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn max_episode_steps(&self) -> usize {
        self.max_episode_steps
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<S> {
    pub reward: f64,
    pub cost: f64,
    pub next_state: S,
    pub terminal: bool,
}

pub trait Environment: Send + Sync {
    type State: Clone + Debug + PartialEq + Send + Sync;

    fn num_actions(&self) -> usize;

    fn initial_state(&self, rng: &mut SimRng) -> Self::State;

    fn step(&self, state: &Self::State, action: usize, rng: &mut SimRng) -> StepOutcome<Self::State>;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// Action taken by the rollout policy; uniform over all actions by default.
    fn rollout_action(&self, _state: &Self::State, rng: &mut SimRng) -> usize {
        rng.gen_range(0..self.num_actions())
    }

    /// The state as a planner may see it. Environments with hidden variables
    /// strip them here; the default is the full state.
    fn planning_view(&self, state: &Self::State) -> Self::State {
        state.clone()
    }

    /// Critic input encoding.
    fn features(&self, state: &Self::State) -> Vec<f64>;

    fn feature_len(&self) -> usize;

    /// Identifies the feature layout; stored in critic checkpoints.
    fn encoder_id(&self) -> String;
}

/// Result of one planning call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: usize,
    pub peak_depth: usize,
}

pub trait Planner<S> {
    fn num_actions(&self) -> usize;

    fn plan(&mut self, state: &S, rng: &mut PlannerRng) -> Result<Decision, CmdpError>;

    /// Called after the environment executed the planned action.
    fn observe(&mut self, _action: usize, _outcome: &StepOutcome<S>) {}

    /// Called before the first decision of an episode.
    fn reset(&mut self) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub action: usize,
    pub reward: f64,
    pub cost: f64,
    pub next_state: S,
    pub next_action: Option<usize>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord<S> {
    pub transitions: Vec<Transition<S>>,
    pub discounted_reward: f64,
    pub discounted_cost: f64,
    /// Max over decision steps of the search tree depth.
    pub peak_tree_depth: usize,
    /// Mean over decision steps of the search tree depth.
    pub mean_tree_depth: f64,
    pub seed: u64,
    /// Episode hit `max_episode_steps` without reaching a terminal state.
    pub truncated: bool,
}

impl<S> EpisodeRecord<S> {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.reward).collect()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.cost).collect()
    }
}

/// Σ_t γ^t · values[t].
pub fn discounted_return(values: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut discount = 1.0;
    for v in values {
        total += discount * v;
        discount *= gamma;
    }
    total
}

/// Strict: an episode exactly at ĉ is feasible.
pub fn is_violation<S>(record: &EpisodeRecord<S>, spec: &CmdpSpec) -> bool {
    record.discounted_cost > spec.c_hat()
}

/// Seeds for one episode, derived from the experiment's master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeSeeds {
    pub master_seed: u64,
    pub episode_index: u64,
}

impl EpisodeSeeds {
    pub fn new(master_seed: u64, episode_index: u64) -> Self {
        Self { master_seed, episode_index }
    }

    pub fn seed(&self) -> u64 {
        episode_seed(self.master_seed, self.episode_index)
    }

    pub fn environment_rng(&self) -> SimRng {
        RngStream::new(self.seed(), StreamLabel::Environment).rng()
    }

    pub fn planner_rng(&self) -> PlannerRng {
        PlannerRng::new(self.seed())
    }
}

/// Plan, act and observe until a terminal state or the step cap.
pub fn run_episode<E, P>(
    env: &E,
    planner: &mut P,
    spec: &CmdpSpec,
    seeds: &EpisodeSeeds,
) -> Result<EpisodeRecord<E::State>, CmdpError>
where
    E: Environment,
    P: Planner<E::State> + ?Sized,
{
    let num_actions = env.num_actions();
    if planner.num_actions() != num_actions {
        return Err(CmdpError::ActionSpaceMismatch {
            planner: planner.num_actions(),
            environment: num_actions,
        });
    }
    let mut env_rng = seeds.environment_rng();
    let mut planner_rng = seeds.planner_rng();
    planner.reset();

    let mut state = env.initial_state(&mut env_rng);
    let mut transitions: Vec<Transition<E::State>> = Vec::new();
    let mut peak = 0usize;
    let mut depth_sum = 0usize;
    let mut terminal = env.is_terminal(&state);

    while !terminal && transitions.len() < spec.max_episode_steps() {
        let view = env.planning_view(&state);
        let decision = planner.plan(&view, &mut planner_rng)?;
        if decision.action >= num_actions {
            return Err(CmdpError::ActionOutOfRange { action: decision.action, num_actions });
        }
        peak = peak.max(decision.peak_depth);
        depth_sum += decision.peak_depth;
        if let Some(last) = transitions.last_mut() {
            last.next_action = Some(decision.action);
        }
        let outcome = env.step(&state, decision.action, &mut env_rng);
        planner.observe(decision.action, &outcome);
        terminal = outcome.terminal;
        transitions.push(Transition {
            state: state.clone(),
            action: decision.action,
            reward: outcome.reward,
            cost: outcome.cost,
            next_state: outcome.next_state.clone(),
            next_action: None,
            terminal: outcome.terminal,
        });
        state = outcome.next_state;
    }

    let rewards: Vec<f64> = transitions.iter().map(|t| t.reward).collect();
    let costs: Vec<f64> = transitions.iter().map(|t| t.cost).collect();
    let decisions = transitions.len();
    Ok(EpisodeRecord {
        discounted_reward: discounted_return(&rewards, spec.gamma()),
        discounted_cost: discounted_return(&costs, spec.gamma()),
        peak_tree_depth: peak,
        mean_tree_depth: if decisions == 0 { 0.0 } else { depth_sum as f64 / decisions as f64 },
        seed: seeds.seed(),
        truncated: !terminal,
        transitions,
    })
}
