use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cmcts_core::critic::save_checkpoint;
use cmcts_harness::output::{write_metrics_csv, write_training_trace};
use cmcts_harness::{
    compare_planners, emit_plot_data, load_critic, run_sweep, state_visitation_map, sweep_results, train_critic_observed,
    ExperimentConfig, HarnessError,
};

/// Output directory used when neither `--out` nor `output_dir` is given.
const OUT_ENV: &str = "CMDP_PLAN_OUT";

#[derive(Parser)]
#[command(name = "cmdp-plan", about = "Constrained MDP planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides a config key, e.g. `--set search.uct_c=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the λ-scheduled training phase and save the critic.
    TrainCritic(Common),
    /// Evaluate the configured planner at `search.iterations`.
    Evaluate(Common),
    /// Evaluate the configured planner over `iteration_sweep`.
    Sweep(Common),
    /// Sweep every planner in `compare.planners` on shared seeds.
    Compare(Common),
    /// Gridworld state-visitation counts at `search.iterations`.
    VisitationMap(Common),
    /// Print a critic checkpoint's header.
    InspectCheckpoint {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let default_out = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from);
    let mut config = ExperimentConfig::load(&common.config, &common.set, &default_out)?;
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn print_row(label: &str, r: &cmcts_harness::MetricsRow) {
    println!(
        "{label} iterations={} episodes={} reward={:.4}±{:.4} cost={:.4}±{:.4} violations={}% depth={:.2}±{:.2} cost_var={:.6}",
        r.planning_iterations,
        r.episodes,
        r.mean_discounted_reward,
        r.reward_stderr,
        r.mean_discounted_cost,
        r.cost_stderr,
        r.violation_pct,
        r.mean_peak_tree_depth,
        r.depth_stderr,
        r.cost_variance
    );
}

fn checkpoint_path(config: &ExperimentConfig) -> PathBuf {
    config.critic_checkpoint_path.clone().unwrap_or_else(|| config.output_dir.join("critic.bin"))
}

fn train(common: &Common) -> Result<(), HarnessError> {
    let config = load(common)?;
    let outcome = match train_critic_observed(&config, |r| {
        println!(
            "loop {} lambda={} cost={}{}",
            r.n,
            r.lambda,
            r.collect_mean_cost,
            r.eval_mean_cost.map_or(String::new(), |c| format!(" eval_cost={c}"))
        )
    }) {
        Ok(o) => o,
        Err(e) => {
            if let HarnessError::Training(cmcts_core::cmcts::TrainLoopError::Unsafe { trace, .. }) = &e {
                write_training_trace(&config.output_dir.join("train_trace.csv"), trace)?;
            }
            return Err(e);
        }
    };
    write_training_trace(&config.output_dir.join("train_trace.csv"), &outcome.trace)?;
    let path = checkpoint_path(&config);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    save_checkpoint(&outcome.ensemble, &path).map_err(|e| HarnessError::io(&path, e))?;
    println!("critic saved to {} ({} transitions)", path.display(), outcome.dataset.len());
    Ok(())
}

fn evaluate(common: &Common) -> Result<(), HarnessError> {
    let mut config = load(common)?;
    config.iteration_sweep = vec![config.search.iterations];
    let out = sweep_results(&config, None)?;
    let path = config.output_dir.join(format!("{}_evaluate.csv", config.planner));
    write_metrics_csv(&path, &out.rows)?;
    print_row(config.planner.name(), &out.rows[0]);
    Ok(())
}

fn sweep(common: &Common) -> Result<(), HarnessError> {
    let config = load(common)?;
    let out = run_sweep(&config, None)?;
    emit_plot_data(&out.rows, &config.output_dir.join(format!("{}.dat", config.planner)))?;
    for r in &out.rows {
        print_row(config.planner.name(), r);
    }
    Ok(())
}

fn compare(common: &Common) -> Result<(), HarnessError> {
    let config = load(common)?;
    let configs: Vec<_> = config.compare_planners.iter().map(|&k| config.with_planner(k)).collect();
    // one critic load shared by every C-MCTS run
    let critic = match &config.critic_checkpoint_path {
        Some(p) if config.compare_planners.contains(&cmcts_harness::PlannerKind::Cmcts) => Some(Arc::new(load_critic(p)?)),
        _ => None,
    };
    let report = compare_planners(&configs, critic.as_ref())?;
    for run in &report.runs {
        emit_plot_data(&run.rows, &config.output_dir.join(format!("{}.dat", run.planner)))?;
    }
    print!("{}", report.summary);
    Ok(())
}

fn visitation(common: &Common) -> Result<(), HarnessError> {
    let config = load(common)?;
    let map = state_visitation_map(&config, None)?;
    map.write(&config.output_dir, config.planner.name())?;
    print!("{}", map.grid_csv());
    Ok(())
}

fn inspect(path: &Path) -> Result<(), HarnessError> {
    let critic = load_critic(path)?;
    println!("members: {}", critic.k());
    println!("layer dims: {:?}", critic.layer_dims());
    println!("sigma_max: {}", critic.sigma_max());
    println!("encoder: {}", critic.encoder_id());
    println!("parameters per member: {}", critic.members()[0].params().len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::TrainCritic(c) => train(c),
        Command::Evaluate(c) => evaluate(c),
        Command::Sweep(c) => sweep(c),
        Command::Compare(c) => compare(c),
        Command::VisitationMap(c) => visitation(c),
        Command::InspectCheckpoint { checkpoint } => inspect(checkpoint),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
