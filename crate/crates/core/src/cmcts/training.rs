//! Offline critic training: solve scalarized MDPs on the training simulator
//! with a decaying λ schedule, fit the ensemble on the logged transitions
//! once the cost is near the constraint, and accept the critic only after a
//! safe C-MCTS evaluation on the simulator.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use super::planner::{CmctsConfig, CmctsPlanner};
use crate::cmdp::{run_episode, CmdpError, CmdpSpec, Environment, EpisodeRecord, EpisodeSeeds};
use crate::critic::{train, CriticEnsemble, CriticError, TrainConfig, TransitionDataset};
use crate::mcts::{MctsPlanner, PlannerConfig};
use crate::rng::mix;

/// `max(0, λ_n + (α₀/n)·(V̄_C − ĉ))`.
pub fn lambda_schedule_update(lambda_n: f64, mean_cost: f64, c_hat: f64, alpha0: f64, n: u64) -> f64 {
    assert!(n >= 1, "loop index starts at 1");
    (lambda_n + alpha0 / n as f64 * (mean_cost - c_hat)).max(0.0)
}

/// [`lambda_schedule_update`] projected onto `[0, lambda_max]`.
pub fn bounded_lambda_update(lambda_n: f64, mean_cost: f64, c_hat: f64, alpha0: f64, n: u64, lambda_max: f64) -> f64 {
    lambda_schedule_update(lambda_n, mean_cost, c_hat, alpha0, n).min(lambda_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectResult {
    pub dataset: TransitionDataset,
    pub mean_cost: f64,
    pub episode_lengths: Vec<usize>,
}

/// Runs episodes `first_episode..first_episode + episodes` of λ-scalarized
/// MCTS on `sim` (also used as the planning model) and logs every transition.
pub fn collect_phase<E: Environment + Clone>(
    lambda: f64,
    sim: &E,
    planner_config: &PlannerConfig,
    spec: &CmdpSpec,
    episodes: usize,
    master_seed: u64,
    first_episode: u64,
) -> Result<CollectResult, CmdpError> {
    let config = planner_config.clone().with_lambda(lambda);
    let records = run_episodes(episodes, master_seed, first_episode, |seeds| {
        let mut planner = MctsPlanner::new(sim.clone(), config.clone()).map_err(|e| CmdpError::Planner(e.to_string()))?;
        run_episode(sim, &mut planner, spec, seeds)
    })?;
    Ok(summarize(sim, &records))
}

fn run_episodes<S: Send, F>(
    episodes: usize,
    master_seed: u64,
    first_episode: u64,
    run: F,
) -> Result<Vec<EpisodeRecord<S>>, CmdpError>
where
    F: Fn(&EpisodeSeeds) -> Result<EpisodeRecord<S>, CmdpError> + Sync,
{
    (0..episodes as u64)
        .into_par_iter()
        .map(|i| run(&EpisodeSeeds::new(master_seed, first_episode + i)))
        .collect()
}

fn summarize<E: Environment>(env: &E, records: &[EpisodeRecord<E::State>]) -> CollectResult {
    let mut dataset = TransitionDataset::new();
    for r in records {
        dataset.append_episode(env, r);
    }
    let mean_cost = records.iter().map(|r| r.discounted_cost).sum::<f64>() / records.len().max(1) as f64;
    CollectResult { dataset, mean_cost, episode_lengths: records.iter().map(|r| r.len()).collect() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLoopConfig {
    pub alpha0: f64,
    pub epsilon: f64,
    pub sigma_max: f64,
    pub train_iterations: usize,
    pub episodes_per_mdp: usize,
    pub max_outer_loops: usize,
    pub lambda_init: f64,
    /// Upper end of the λ schedule. Without it one very unsafe first loop
    /// sends λ so high that the `α₀/n` steps never bring it back.
    pub lambda_max: f64,
    /// UCT constant of the collection and evaluation planners.
    pub uct_c: f64,
    /// Passed to the evaluation planner, see [`CmctsConfig::prune_slack`].
    pub prune_slack: f64,
    pub train: TrainConfig,
    pub master_seed: u64,
}

impl TrainLoopConfig {
    pub fn new(alpha0: f64, epsilon: f64, sigma_max: f64, train_iterations: usize) -> Self {
        Self {
            alpha0,
            epsilon,
            sigma_max,
            train_iterations,
            episodes_per_mdp: 20,
            max_outer_loops: 30,
            lambda_init: 0.0,
            lambda_max: 10.0,
            uct_c: std::f64::consts::SQRT_2,
            prune_slack: 0.0,
            train: TrainConfig::default(),
            master_seed: 0,
        }
    }

    pub fn validate(&self, c_hat: f64) -> Result<(), TrainLoopError> {
        let ok = self.alpha0 > 0.0
            && self.epsilon > 0.0
            && self.epsilon < c_hat + 1.0
            && self.sigma_max >= 0.0
            && self.train_iterations > 0
            && self.episodes_per_mdp > 0
            && self.max_outer_loops > 0
            && self.lambda_init >= 0.0
            && self.lambda_max >= self.lambda_init
            && self.prune_slack >= 0.0;
        if !ok {
            return Err(TrainLoopError::Config(format!("invalid training loop config {self:?}")));
        }
        self.train.validate().map_err(TrainLoopError::Critic)
    }
}

/// One pass of the λ schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopRecord {
    /// Schedule index, starting at 1.
    pub n: u64,
    pub lambda: f64,
    pub collect_mean_cost: f64,
    /// Mean discounted cost of the C-MCTS evaluation, if one ran.
    pub eval_mean_cost: Option<f64>,
    pub dataset_size: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub ensemble: CriticEnsemble,
    pub trace: Vec<LoopRecord>,
    pub dataset: TransitionDataset,
}

#[derive(Debug, Error)]
pub enum TrainLoopError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
    #[error(transparent)]
    Critic(#[from] CriticError),
    /// `last` is the most recently fitted critic, if any loop converged.
    #[error("no safe critic after {} loops: {}", trace.len(), format_trace(trace))]
    Unsafe { trace: Vec<LoopRecord>, last: Option<Box<CriticEnsemble>> },
}

fn format_trace(trace: &[LoopRecord]) -> String {
    trace
        .iter()
        .map(|r| match r.eval_mean_cost {
            Some(e) => format!("n={} λ={} cost={} eval={}", r.n, r.lambda, r.collect_mean_cost, e),
            None => format!("n={} λ={} cost={}", r.n, r.lambda, r.collect_mean_cost),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Converged when the schedule's cost lies in `[ĉ − ε, ĉ]`, or when λ is 0
/// and the unpenalized policy is already within the constraint.
fn schedule_converged(lambda: f64, mean_cost: f64, c_hat: f64, epsilon: f64) -> bool {
    (c_hat - epsilon <= mean_cost && mean_cost <= c_hat) || (lambda == 0.0 && mean_cost <= c_hat)
}

/// Full training phase. `sim` generates data and checks safety; the
/// evaluation C-MCTS plans with `planning_model`.
pub fn training_loop<E: Environment + Clone>(
    config: &TrainLoopConfig,
    sim: &E,
    planning_model: &E,
    spec: &CmdpSpec,
) -> Result<TrainOutcome, TrainLoopError> {
    training_loop_observed(config, sim, planning_model, spec, |_| {})
}

/// [`training_loop`], calling `on_loop` after every pass of the schedule.
pub fn training_loop_observed<E: Environment + Clone>(
    config: &TrainLoopConfig,
    sim: &E,
    planning_model: &E,
    spec: &CmdpSpec,
    mut on_loop: impl FnMut(&LoopRecord),
) -> Result<TrainOutcome, TrainLoopError> {
    let c_hat = spec.c_hat();
    config.validate(c_hat)?;
    let mut planner = PlannerConfig::new(spec.gamma()).with_iterations(config.train_iterations);
    planner.uct_c = config.uct_c;
    planner.validate().map_err(|e| TrainLoopError::Config(e.to_string()))?;

    let dims = config.train.layer_dims(sim.feature_len(), sim.num_actions());
    let mut ensemble =
        CriticEnsemble::new(config.train.k, &dims, config.sigma_max, sim.encoder_id(), mix(config.master_seed))?;
    let mut dataset = TransitionDataset::new();
    let mut trace = Vec::new();
    let mut lambda = config.lambda_init;
    let mut next_episode = 0u64;
    let episodes = config.episodes_per_mdp;
    let mut fitted = false;

    for n in 1..=config.max_outer_loops as u64 {
        let collected = collect_phase(lambda, sim, &planner, spec, episodes, config.master_seed, next_episode)?;
        next_episode += episodes as u64;
        dataset.extend(collected.dataset);
        let mut record = LoopRecord {
            n,
            lambda,
            collect_mean_cost: collected.mean_cost,
            eval_mean_cost: None,
            dataset_size: dataset.len(),
        };

        if schedule_converged(lambda, collected.mean_cost, c_hat, config.epsilon) {
            let train_config = TrainConfig { seed: mix(config.master_seed ^ n), ..config.train.clone() };
            train(&mut ensemble, &dataset, &train_config, spec.gamma())?;
            fitted = true;
            let shared = Arc::new(ensemble.clone());
            let mut cmcts = CmctsConfig::new(planner.clone(), c_hat);
            cmcts.prune_slack = config.prune_slack;
            let records = run_episodes(episodes, config.master_seed, next_episode, |seeds| {
                let mut p = CmctsPlanner::new(planning_model.clone(), shared.clone(), cmcts.clone())
                    .map_err(|e| CmdpError::Planner(e.to_string()))?;
                run_episode(sim, &mut p, spec, seeds)
            })?;
            next_episode += episodes as u64;
            let evaluated = summarize(sim, &records);
            // evaluation episodes visit the states the deployed planner reaches
            dataset.extend(evaluated.dataset);
            record.eval_mean_cost = Some(evaluated.mean_cost);
            record.dataset_size = dataset.len();
            on_loop(&record);
            trace.push(record);
            if evaluated.mean_cost <= c_hat {
                return Ok(TrainOutcome { ensemble, trace, dataset });
            }
        } else {
            on_loop(&record);
            trace.push(record);
        }
        lambda = bounded_lambda_update(lambda, collected.mean_cost, c_hat, config.alpha0, n, config.lambda_max);
    }
    Err(TrainLoopError::Unsafe { trace, last: fitted.then(|| Box::new(ensemble)) })
}
