//! Where a planner goes on the Safe Gridworld.

use std::path::Path;
use std::sync::Arc;

use cmcts_core::cmdp::EpisodeRecord;
use cmcts_core::critic::CriticEnsemble;
use cmcts_core::env::gridworld::MOVES;
use cmcts_core::env::{GridworldState, Layout};

use crate::config::ExperimentConfig;
use crate::run::{episode_record, gridworld_worlds, map_jobs, resolve_critic};
use crate::HarnessError;

/// Counts of the cells the agent acted from and the actions it chose there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitationMap {
    pub width: usize,
    pub height: usize,
    /// `counts[y][x]`, `y = 0` the bottom row.
    pub counts: Vec<Vec<u64>>,
    /// `actions[y][x][a]`.
    pub actions: Vec<Vec<Vec<u64>>>,
    pub failed_episodes: usize,
}

impl VisitationMap {
    pub fn new(layout: &Layout) -> Self {
        let (w, h) = (layout.width(), layout.height());
        Self {
            width: w,
            height: h,
            counts: vec![vec![0; w]; h],
            actions: vec![vec![vec![0; MOVES.len()]; w]; h],
            failed_episodes: 0,
        }
    }

    /// Adds one count per decision step, so the total equals the summed
    /// episode lengths.
    pub fn record(&mut self, record: &EpisodeRecord<GridworldState>) {
        for t in &record.transitions {
            let (x, y) = (t.state.pos.0 as usize, t.state.pos.1 as usize);
            self.counts[y][x] += 1;
            self.actions[y][x][t.action] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn count(&self, (x, y): (i32, i32)) -> u64 {
        self.counts[y as usize][x as usize]
    }

    /// Grid CSV, top row first, no header.
    pub fn grid_csv(&self) -> String {
        let mut s = String::new();
        for row in self.counts.iter().rev() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// `x,y,a0..a8` for every cell, bottom row first.
    pub fn actions_csv(&self) -> String {
        let mut s = String::from("x,y");
        for a in 0..MOVES.len() {
            s.push_str(&format!(",a{a}"));
        }
        s.push('\n');
        for (y, row) in self.actions.iter().enumerate() {
            for (x, hist) in row.iter().enumerate() {
                let counts: Vec<String> = hist.iter().map(u64::to_string).collect();
                s.push_str(&format!("{x},{y},{}\n", counts.join(",")));
            }
        }
        s
    }

    pub fn write(&self, dir: &Path, prefix: &str) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, text) in [("visitation.csv", self.grid_csv()), ("visitation_actions.csv", self.actions_csv())] {
            let path = dir.join(format!("{prefix}_{name}"));
            std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(())
    }
}

/// Runs `config.episodes` episodes of the configured planner at
/// `config.search.iterations` on the real gridworld and counts visits.
pub fn state_visitation_map(
    config: &ExperimentConfig,
    critic: Option<&Arc<CriticEnsemble>>,
) -> Result<VisitationMap, HarnessError> {
    let worlds = gridworld_worlds(config)
        .ok_or_else(|| HarnessError::Config(format!("visitation maps need the gridworld, not {}", config.env.name())))?;
    let critic = resolve_critic(config, config.planner, critic)?;
    let spec = config.spec_for(9)?;
    let iterations = config.search.iterations;
    crate::run::make_planner(config, config.planner, iterations, &worlds.model, critic.as_ref())?;
    let episodes: Vec<u64> = (0..config.episodes as u64).collect();
    let records = map_jobs(config.parallel, &episodes, |&e| {
        episode_record(config, &worlds, &spec, config.planner, iterations, e, critic.as_ref())
    });
    let mut map = VisitationMap::new(worlds.real.layout());
    for r in &records {
        match r {
            Ok(record) => map.record(record),
            Err(_) => map.failed_episodes += 1,
        }
    }
    Ok(map)
}
