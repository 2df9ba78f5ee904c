//! CSV and plot-data writers. Reals use the shortest decimal that parses back
//! to the same `f64`, so reruns produce identical bytes.

use std::fs;
use std::path::Path;

use cmcts_core::cmcts::LoopRecord;

use crate::config::PlannerKind;
use crate::metrics::{EpisodeResult, MetricsRow};
use crate::HarnessError;

pub fn format_float(x: f64) -> String {
    format!("{x}")
}

pub const METRICS_HEADER: [&str; 12] = [
    "planning_iterations",
    "episodes",
    "failed_episodes",
    "mean_discounted_reward",
    "reward_stderr",
    "mean_discounted_cost",
    "cost_stderr",
    "violation_pct",
    "violation_pct_stderr",
    "mean_peak_tree_depth",
    "depth_stderr",
    "cost_variance",
];

fn metrics_fields(row: &MetricsRow) -> Vec<String> {
    let f = format_float;
    vec![
        row.planning_iterations.to_string(),
        row.episodes.to_string(),
        row.failed_episodes.to_string(),
        f(row.mean_discounted_reward),
        f(row.reward_stderr),
        f(row.mean_discounted_cost),
        f(row.cost_stderr),
        f(row.violation_pct),
        f(row.violation_pct_stderr),
        f(row.mean_peak_tree_depth),
        f(row.depth_stderr),
        f(row.cost_variance),
    ]
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    w.write_record(header).map_err(|e| HarnessError::io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<(), HarnessError> {
    write_csv(path, &METRICS_HEADER, rows.iter().map(metrics_fields))
}

/// Joint table of several planners, one row per planner and budget.
pub fn write_comparison_csv(path: &Path, runs: &[(PlannerKind, Vec<MetricsRow>)]) -> Result<(), HarnessError> {
    let mut header = vec!["planner"];
    header.extend(METRICS_HEADER);
    let rows = runs.iter().flat_map(|(kind, rows)| {
        rows.iter().map(move |r| {
            let mut fields = vec![kind.name().to_string()];
            fields.extend(metrics_fields(r));
            fields
        })
    });
    write_csv(path, &header, rows)
}

/// Per-episode table. Failed episodes have empty numeric fields and their
/// error in `reason`.
pub fn write_episodes_csv(path: &Path, results: &[EpisodeResult]) -> Result<(), HarnessError> {
    let header = [
        "planner",
        "planning_iterations",
        "episode",
        "seed",
        "discounted_reward",
        "discounted_cost",
        "violation",
        "peak_tree_depth",
        "length",
        "truncated",
        "reason",
    ];
    let rows = results.iter().map(|r| {
        let mut fields = vec![r.planner.name().to_string(), r.iterations.to_string(), r.episode.to_string(), r.seed.to_string()];
        match &r.outcome {
            Ok(s) => fields.extend([
                format_float(s.discounted_reward),
                format_float(s.discounted_cost),
                (s.violation as u8).to_string(),
                s.peak_tree_depth.to_string(),
                s.length.to_string(),
                (s.truncated as u8).to_string(),
                String::new(),
            ]),
            Err(reason) => {
                fields.extend(std::iter::repeat_n(String::new(), 6));
                fields.push(reason.clone());
            }
        }
        fields
    });
    write_csv(path, &header, rows)
}

/// Column order of [`emit_plot_data`].
pub const PLOT_COLUMNS: [&str; 9] = [
    "Number_of_Planning_Iterations",
    "Average_Discounted_Cumulative_Reward",
    "Average_Discounted_Cumulative_Reward_Error",
    "Average_Discounted_Cumulative_Cost",
    "Average_Discounted_Cumulative_Cost_Error",
    "Number_of_Cost_Violations",
    "Number_of_Cost_Violations_Error",
    "Tree_Depth",
    "Tree_Depth_Error",
];

/// Whitespace-separated columns in [`PLOT_COLUMNS`] order, one header line
/// and one line per row. Cost violations are percentages of episodes.
pub fn emit_plot_data(rows: &[MetricsRow], path: &Path) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Config("no rows to plot".into()));
    }
    let mut text = PLOT_COLUMNS.join(" ");
    text.push('\n');
    for r in rows {
        let fields = [
            r.planning_iterations.to_string(),
            format_float(r.mean_discounted_reward),
            format_float(r.reward_stderr),
            format_float(r.mean_discounted_cost),
            format_float(r.cost_stderr),
            format_float(r.violation_pct),
            format_float(r.violation_pct_stderr),
            format_float(r.mean_peak_tree_depth),
            format_float(r.depth_stderr),
        ];
        text.push_str(&fields.join(" "));
        text.push('\n');
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// One line per pass of the λ schedule; `eval_mean_cost` is empty when no
/// evaluation ran.
pub fn write_training_trace(path: &Path, trace: &[LoopRecord]) -> Result<(), HarnessError> {
    let header = ["n", "lambda", "collect_mean_cost", "eval_mean_cost", "dataset_size"];
    let rows = trace.iter().map(|r| {
        vec![
            r.n.to_string(),
            format_float(r.lambda),
            format_float(r.collect_mean_cost),
            r.eval_mean_cost.map(format_float).unwrap_or_default(),
            r.dataset_size.to_string(),
        ]
    });
    write_csv(path, &header, rows)
}
