//! Building environments and planners from a config, and running seeded
//! episodes over a sweep of planning budgets.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use cmcts_core::ccmcp::CcmcpPlanner;
use cmcts_core::cmcts::{training_loop_observed, CmctsConfig, CmctsPlanner, LoopRecord, TrainOutcome};
use cmcts_core::cmdp::{run_episode, CmdpSpec, EpisodeRecord, EpisodeSeeds, Environment, Planner};
use cmcts_core::critic::{load_checkpoint, CriticEnsemble};
use cmcts_core::env::{Rocksample, SafeGridworld};
use cmcts_core::mcts::MctsPlanner;
use rayon::prelude::*;

use crate::config::{EnvConfig, ExperimentConfig, PlannerKind};
use crate::metrics::{EpisodeResult, EpisodeStats, MetricsRow};
use crate::output::{format_float, write_comparison_csv, write_episodes_csv, write_metrics_csv};
use crate::HarnessError;

/// The three dynamics an experiment touches.
#[derive(Debug, Clone)]
pub struct Worlds<E> {
    /// Evaluation ("real") dynamics.
    pub real: E,
    /// Data-collection simulator of the training phase.
    pub sim: E,
    /// Model the deployed planners search with.
    pub model: E,
    /// Model the training phase's evaluation planner searches with.
    pub train_model: E,
}

pub fn rocksample_worlds(config: &ExperimentConfig) -> Option<Worlds<Rocksample>> {
    let EnvConfig::Rocksample { config: rs, d0_delta } = &config.env else { return None };
    let real = Rocksample::new(rs.clone()).expect("validated config");
    let sim = Rocksample::new(rs.with_d0(rs.d0 + d0_delta)).expect("validated config");
    Some(Worlds { model: real.clone(), train_model: sim.clone(), real, sim })
}

pub fn gridworld_worlds(config: &ExperimentConfig) -> Option<Worlds<SafeGridworld>> {
    let EnvConfig::Gridworld { config: gw, model_wind_p, sim_wind_p } = &config.env else { return None };
    let with = |w: f64| SafeGridworld::new(gw.with_wind(w).expect("validated config"));
    let model = with(*model_wind_p);
    Some(Worlds { real: SafeGridworld::new(gw.clone()), sim: with(*sim_wind_p), train_model: model.clone(), model })
}

pub fn load_critic(path: &Path) -> Result<CriticEnsemble, HarnessError> {
    load_checkpoint(path).map_err(|e| HarnessError::Config(format!("critic checkpoint: {e}")))
}

/// The critic a C-MCTS run deploys: `given`, or the configured checkpoint,
/// with the configured σ_max override applied.
pub(crate) fn resolve_critic(
    config: &ExperimentConfig,
    kind: PlannerKind,
    given: Option<&Arc<CriticEnsemble>>,
) -> Result<Option<Arc<CriticEnsemble>>, HarnessError> {
    if kind != PlannerKind::Cmcts {
        return Ok(None);
    }
    let critic = match (given, &config.critic_checkpoint_path) {
        (Some(c), _) => c.clone(),
        (None, Some(path)) => Arc::new(load_critic(path)?),
        (None, None) => {
            return Err(HarnessError::Config("planner cmcts needs cmcts.critic_checkpoint_path".into()));
        }
    };
    Ok(Some(match config.deploy_sigma_max {
        Some(s) if s != critic.sigma_max() => Arc::new((*critic).clone().with_sigma_max(s)),
        _ => critic,
    }))
}

pub(crate) fn make_planner<E: Environment + Clone + 'static>(
    config: &ExperimentConfig,
    kind: PlannerKind,
    iterations: usize,
    model: &E,
    critic: Option<&Arc<CriticEnsemble>>,
) -> Result<Box<dyn Planner<E::State>>, HarnessError> {
    let search = config.planner_config(iterations);
    let err = |e: &dyn std::fmt::Display| HarnessError::Config(format!("{kind}: {e}"));
    Ok(match kind {
        PlannerKind::Mcts => Box::new(MctsPlanner::new(model.clone(), search).map_err(|e| err(&e))?),
        PlannerKind::Ccmcp => {
            Box::new(CcmcpPlanner::new(model.clone(), search, config.ccmcp.clone(), config.c_hat).map_err(|e| err(&e))?)
        }
        PlannerKind::Cmcts => {
            let critic = critic.ok_or_else(|| HarnessError::Config("cmcts: no critic".into()))?;
            let mut c = CmctsConfig::new(search, config.c_hat);
            c.prune_slack = config.prune_slack;
            c.track_budget = config.cmcts_track_budget;
            Box::new(CmctsPlanner::new(model.clone(), critic.clone(), c).map_err(|e| err(&e))?)
        }
    })
}

pub(crate) fn episode_record<E: Environment + Clone + 'static>(
    config: &ExperimentConfig,
    worlds: &Worlds<E>,
    spec: &CmdpSpec,
    kind: PlannerKind,
    iterations: usize,
    episode: u64,
    critic: Option<&Arc<CriticEnsemble>>,
) -> Result<EpisodeRecord<E::State>, String> {
    let mut planner = make_planner(config, kind, iterations, &worlds.model, critic).map_err(|e| e.to_string())?;
    run_episode(&worlds.real, planner.as_mut(), spec, &EpisodeSeeds::new(config.master_seed, episode))
        .map_err(|e| e.to_string())
}

/// Maps `f` over `items` in order, on the worker pool when `parallel`.
pub(crate) fn map_jobs<T: Sync, R: Send>(parallel: bool, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub planner: PlannerKind,
    pub rows: Vec<MetricsRow>,
    /// Sorted by budget (in sweep order), then episode index.
    pub episodes: Vec<EpisodeResult>,
}

fn sweep_generic<E: Environment + Clone + 'static>(
    config: &ExperimentConfig,
    worlds: &Worlds<E>,
    critic: Option<&Arc<CriticEnsemble>>,
) -> Result<SweepOutput, HarnessError> {
    let kind = config.planner;
    let spec = config.spec_for(worlds.real.num_actions())?;
    make_planner(config, kind, config.iteration_sweep[0], &worlds.model, critic)?;
    let jobs: Vec<(usize, usize, u64)> = config
        .iteration_sweep
        .iter()
        .enumerate()
        .flat_map(|(slot, &b)| (0..config.episodes as u64).map(move |e| (slot, b, e)))
        .collect();
    let mut results = map_jobs(config.parallel, &jobs, |&(slot, iterations, episode)| {
        let outcome = episode_record(config, worlds, &spec, kind, iterations, episode, critic);
        let result = EpisodeResult {
            planner: kind,
            iterations,
            episode,
            seed: EpisodeSeeds::new(config.master_seed, episode).seed(),
            outcome: outcome.map(|r| EpisodeStats::from_record(&r, &spec)),
        };
        (slot, result)
    });
    results.sort_by_key(|(slot, r)| (*slot, r.episode));
    let rows = config
        .iteration_sweep
        .iter()
        .enumerate()
        .map(|(slot, &b)| {
            let mine: Vec<&EpisodeResult> = results.iter().filter(|(s, _)| *s == slot).map(|(_, r)| r).collect();
            MetricsRow::aggregate(b, &mine)
        })
        .collect();
    Ok(SweepOutput { planner: kind, rows, episodes: results.into_iter().map(|(_, r)| r).collect() })
}

/// Runs the sweep without writing anything. `critic` takes precedence over
/// the configured checkpoint for C-MCTS.
pub fn sweep_results(config: &ExperimentConfig, critic: Option<&Arc<CriticEnsemble>>) -> Result<SweepOutput, HarnessError> {
    let critic = resolve_critic(config, config.planner, critic)?;
    if let Some(w) = rocksample_worlds(config) {
        sweep_generic(config, &w, critic.as_ref())
    } else {
        sweep_generic(config, &gridworld_worlds(config).expect("gridworld"), critic.as_ref())
    }
}

/// [`sweep_results`], then `<planner>_sweep.csv` and `<planner>_episodes.csv`
/// in the output directory.
pub fn run_sweep(config: &ExperimentConfig, critic: Option<&Arc<CriticEnsemble>>) -> Result<SweepOutput, HarnessError> {
    let out = sweep_results(config, critic)?;
    let name = config.planner.name();
    write_metrics_csv(&config.output_dir.join(format!("{name}_sweep.csv")), &out.rows)?;
    write_episodes_csv(&config.output_dir.join(format!("{name}_episodes.csv")), &out.episodes)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub runs: Vec<SweepOutput>,
    /// `(budget, CC-MCP cost variance / C-MCTS cost variance)` when both ran.
    pub variance_ratios: Vec<(usize, f64)>,
    /// Planners whose mean cost exceeds ĉ at some budget.
    pub over_constraint: Vec<PlannerKind>,
    pub summary: String,
}

fn same_experiment(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    a.env == b.env
        && a.iteration_sweep == b.iteration_sweep
        && a.episodes == b.episodes
        && a.master_seed == b.master_seed
        && a.gamma == b.gamma
        && a.c_hat == b.c_hat
        && a.max_episode_steps == b.max_episode_steps
}

/// Sweeps every config on shared seeds and writes `compare.csv` and
/// `compare_summary.txt` to the first config's output directory.
pub fn compare_planners(
    configs: &[ExperimentConfig],
    critic: Option<&Arc<CriticEnsemble>>,
) -> Result<ComparisonReport, HarnessError> {
    let first = configs.first().ok_or_else(|| HarnessError::Config("nothing to compare".into()))?;
    if let Some(c) = configs.iter().find(|c| !same_experiment(first, c)) {
        return Err(HarnessError::Config(format!(
            "planner {} does not share the environment, sweep and seeds of planner {}",
            c.planner, first.planner
        )));
    }
    let runs = configs.iter().map(|c| run_sweep(c, critic)).collect::<Result<Vec<_>, _>>()?;
    let by_kind = |k: PlannerKind| runs.iter().find(|r| r.planner == k);
    let variance_ratios = match (by_kind(PlannerKind::Ccmcp), by_kind(PlannerKind::Cmcts)) {
        (Some(cc), Some(cm)) => {
            cc.rows.iter().zip(&cm.rows).map(|(a, b)| (a.planning_iterations, a.cost_variance / b.cost_variance)).collect()
        }
        _ => Vec::new(),
    };
    let over_constraint: Vec<PlannerKind> = runs
        .iter()
        .filter(|r| r.rows.iter().any(|row| row.mean_discounted_cost > first.c_hat))
        .map(|r| r.planner)
        .collect();

    let mut s = String::new();
    writeln!(s, "environment {} with c_hat {}", first.env.name(), format_float(first.c_hat)).unwrap();
    for run in &runs {
        let best = run
            .rows
            .iter()
            .filter(|r| r.episodes > 0)
            .max_by(|a, b| a.mean_discounted_reward.total_cmp(&b.mean_discounted_reward));
        let violations: usize = run
            .episodes
            .iter()
            .filter(|e| e.outcome.as_ref().is_ok_and(|s| s.violation))
            .count();
        let failed = run.episodes.iter().filter(|e| e.outcome.is_err()).count();
        let best = best.map_or("none".to_string(), |b| {
            format!("{} at {} iterations", format_float(b.mean_discounted_reward), b.planning_iterations)
        });
        write!(s, "{}: best reward {best}; violations {violations}/{}", run.planner, run.episodes.len()).unwrap();
        if failed > 0 {
            write!(s, "; failed episodes {failed}").unwrap();
        }
        if over_constraint.contains(&run.planner) {
            let budgets: Vec<String> = run
                .rows
                .iter()
                .filter(|r| r.mean_discounted_cost > first.c_hat)
                .map(|r| r.planning_iterations.to_string())
                .collect();
            write!(s, "; MEAN COST EXCEEDS c_hat at {}", budgets.join(", ")).unwrap();
        }
        s.push('\n');
    }
    for (b, ratio) in &variance_ratios {
        writeln!(s, "cost variance ratio ccmcp/cmcts at {b} iterations: {}", format_float(*ratio)).unwrap();
    }

    let joint: Vec<_> = runs.iter().map(|r| (r.planner, r.rows.clone())).collect();
    write_comparison_csv(&first.output_dir.join("compare.csv"), &joint)?;
    let summary_path = first.output_dir.join("compare_summary.txt");
    std::fs::write(&summary_path, &s).map_err(|e| HarnessError::io(&summary_path, e))?;
    Ok(ComparisonReport { runs, variance_ratios, over_constraint, summary: s })
}

/// Runs the training phase on the configured simulator.
pub fn train_critic(config: &ExperimentConfig) -> Result<TrainOutcome, HarnessError> {
    train_critic_observed(config, |_| {})
}

/// [`train_critic`], reporting every pass of the λ schedule to `on_loop`.
pub fn train_critic_observed(
    config: &ExperimentConfig,
    on_loop: impl FnMut(&LoopRecord),
) -> Result<TrainOutcome, HarnessError> {
    fn go<E: Environment + Clone>(
        config: &ExperimentConfig,
        w: &Worlds<E>,
        on_loop: impl FnMut(&LoopRecord),
    ) -> Result<TrainOutcome, HarnessError> {
        let spec = config.spec_for(w.sim.num_actions())?;
        Ok(training_loop_observed(&config.train, &w.sim, &w.train_model, &spec, on_loop)?)
    }
    if let Some(w) = rocksample_worlds(config) {
        go(config, &w, on_loop)
    } else {
        go(config, &gridworld_worlds(config).expect("gridworld"), on_loop)
    }
}
