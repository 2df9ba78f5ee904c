use std::path::Path;

use cmcts_harness::{
    compare_planners, state_visitation_map, sweep_results, ExperimentConfig, FlatConfig, HarnessError, PlannerKind,
};

const ROCKSAMPLE: &str = r#"
environment = "rocksample"
planner = "mcts"
iteration_sweep = [32, 64]
episodes = 4
master_seed = 11
c_hat = 1.0
max_episode_steps = 25

[rocksample]
n = 5
m = 7

[search]
uct_c = 0.1
"#;

fn config(text: &str, out: &Path, overrides: &[&str]) -> ExperimentConfig {
    let mut flat = FlatConfig::parse(text).unwrap();
    for o in overrides {
        flat.set(o).unwrap();
    }
    ExperimentConfig::from_flat(&flat, out).unwrap()
}

#[test]
fn mean_cost_is_the_mean_over_episodes() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep_results(&config(ROCKSAMPLE, dir.path(), &[]), None).unwrap();
    assert_eq!(out.rows.len(), 2);
    for row in &out.rows {
        let costs: Vec<f64> = out
            .episodes
            .iter()
            .filter(|e| e.iterations == row.planning_iterations)
            .map(|e| e.outcome.as_ref().unwrap().discounted_cost)
            .collect();
        assert_eq!(costs.len(), 4);
        let mean = costs.iter().sum::<f64>() / 4.0;
        assert!((row.mean_discounted_cost - mean).abs() < 1e-12);
        let violations = costs.iter().filter(|&&c| c > 1.0).count() as f64;
        assert!((row.violation_pct - 25.0 * violations).abs() < 1e-9);
    }
}

#[test]
fn compare_needs_shared_seeds_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let a = config(ROCKSAMPLE, dir.path(), &[]);
    let b = config(ROCKSAMPLE, dir.path(), &["planner=ccmcp", "iteration_sweep=[32]"]);
    assert!(matches!(compare_planners(&[a.clone(), b], None), Err(HarnessError::Config(_))));
    let c = config(ROCKSAMPLE, dir.path(), &["planner=ccmcp", "master_seed=12"]);
    assert!(matches!(compare_planners(&[a, c], None), Err(HarnessError::Config(_))));
}

#[test]
fn identical_planners_give_identical_columns() {
    let dir = tempfile::tempdir().unwrap();
    let a = config(ROCKSAMPLE, dir.path(), &[]);
    let report = compare_planners(&[a.clone(), a], None).unwrap();
    assert_eq!(report.runs[0].rows, report.runs[1].rows);
    let text = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], lines[3]);
    assert!(dir.path().join("compare_summary.txt").exists());
}

#[test]
fn summary_flags_planner_over_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    // sensing is free for unpenalized search, so it overspends the budget
    let mcts = config(ROCKSAMPLE, dir.path(), &["mcts.lambda=0.0"]);
    let safe = config(ROCKSAMPLE, dir.path(), &["mcts.lambda=50.0", "planner=ccmcp"]);
    let report = compare_planners(&[mcts, safe], None).unwrap();
    let mcts_row = &report.runs[0].rows;
    assert!(mcts_row.iter().any(|r| r.mean_discounted_cost > 1.0));
    assert!(report.over_constraint.contains(&PlannerKind::Mcts));
    let line = report.summary.lines().find(|l| l.starts_with("mcts:")).unwrap();
    assert!(line.contains("MEAN COST EXCEEDS c_hat"));
}

const COLUMN: &str = "\
U.G
U..
U..
US.
";

#[test]
fn visitation_counts_every_decision() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("column.txt");
    std::fs::write(&layout, COLUMN).unwrap();
    let text = format!(
        r#"
environment = "gridworld"
planner = "mcts"
episodes = 5
master_seed = 3
c_hat = 0.0
max_episode_steps = 20
[gridworld]
wind_p = 0.0
layout_path = "{}"
[search]
iterations = 64
"#,
        layout.display()
    );
    let cfg = config(&text, dir.path(), &[]);
    let map = state_visitation_map(&cfg, None).unwrap();
    assert_eq!((map.width, map.height), (3, 4));
    let mut sweep_cfg = cfg.clone();
    sweep_cfg.iteration_sweep = vec![64];
    let lengths: u64 =
        sweep_results(&sweep_cfg, None).unwrap().episodes.iter().map(|e| e.outcome.as_ref().unwrap().length as u64).sum();
    assert_eq!(map.total(), lengths);
    let action_total: u64 = map.actions.iter().flatten().flatten().sum();
    assert_eq!(action_total, lengths);
    // every episode starts on S
    assert!(map.count((1, 0)) >= 5);
    assert_eq!(map.grid_csv().lines().count(), 4);
    assert_eq!(map.failed_episodes, 0);
}

#[test]
fn visitation_map_rejects_rocksample() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(state_visitation_map(&config(ROCKSAMPLE, dir.path(), &[]), None), Err(HarnessError::Config(_))));
}
