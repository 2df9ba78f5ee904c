//! Per-episode statistics and their aggregation into one row per budget.

use cmcts_core::cmdp::{is_violation, CmdpSpec, EpisodeRecord};

use crate::config::PlannerKind;

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    pub discounted_reward: f64,
    pub discounted_cost: f64,
    pub violation: bool,
    /// Deepest tree over the episode's decisions.
    pub peak_tree_depth: usize,
    pub length: usize,
    pub truncated: bool,
}

impl EpisodeStats {
    pub fn from_record<S>(record: &EpisodeRecord<S>, spec: &CmdpSpec) -> Self {
        Self {
            discounted_reward: record.discounted_reward,
            discounted_cost: record.discounted_cost,
            violation: is_violation(record, spec),
            peak_tree_depth: record.peak_tree_depth,
            length: record.len(),
            truncated: record.truncated,
        }
    }
}

/// One episode of a sweep; failed episodes keep their error message.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub planner: PlannerKind,
    pub iterations: usize,
    pub episode: u64,
    pub seed: u64,
    pub outcome: Result<EpisodeStats, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub planning_iterations: usize,
    /// Episodes that completed.
    pub episodes: usize,
    pub failed_episodes: usize,
    pub mean_discounted_reward: f64,
    pub reward_stderr: f64,
    pub mean_discounted_cost: f64,
    pub cost_stderr: f64,
    pub violation_pct: f64,
    pub violation_pct_stderr: f64,
    pub mean_peak_tree_depth: f64,
    pub depth_stderr: f64,
    /// Population variance of the per-episode discounted cost.
    pub cost_variance: f64,
}

/// Mean and standard error (sample standard deviation over √n; 0 for n ≤ 1).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64
}

impl MetricsRow {
    /// Aggregates the results of one budget. Failed episodes are counted but
    /// excluded from every statistic.
    pub fn aggregate(planning_iterations: usize, results: &[&EpisodeResult]) -> Self {
        let ok: Vec<&EpisodeStats> = results.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        let rewards: Vec<f64> = ok.iter().map(|s| s.discounted_reward).collect();
        let costs: Vec<f64> = ok.iter().map(|s| s.discounted_cost).collect();
        let depths: Vec<f64> = ok.iter().map(|s| s.peak_tree_depth as f64).collect();
        let n = ok.len();
        let violations = ok.iter().filter(|s| s.violation).count();
        let (mean_discounted_reward, reward_stderr) = mean_stderr(&rewards);
        let (mean_discounted_cost, cost_stderr) = mean_stderr(&costs);
        let (mean_peak_tree_depth, depth_stderr) = mean_stderr(&depths);
        let (violation_pct, violation_pct_stderr) = if n == 0 {
            (f64::NAN, 0.0)
        } else {
            let p = violations as f64 / n as f64;
            (100.0 * violations as f64 / n as f64, 100.0 * (p * (1.0 - p) / n as f64).sqrt())
        };
        Self {
            planning_iterations,
            episodes: n,
            failed_episodes: results.len() - n,
            mean_discounted_reward,
            reward_stderr,
            mean_discounted_cost,
            cost_stderr,
            violation_pct,
            violation_pct_stderr,
            mean_peak_tree_depth,
            depth_stderr,
            cost_variance: population_variance(&costs),
        }
    }
}
