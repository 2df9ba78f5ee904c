//! Rocksample(n, m) as a belief-state CMDP.
//!
//! The agent starts in the middle of the left column, can move, sample the
//! rock under it, or sense any rock with a sensor whose accuracy decays with
//! Euclidean distance. Sensing costs 1. The planner sees positions and the
//! Bayesian rock-quality beliefs; the true qualities stay with the real
//! environment. When a state is handed to a planner the qualities are hidden
//! and the dynamics draw rock outcomes from the beliefs instead.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::cmdp::{Environment, StepOutcome};
use crate::rng::{mix, SimRng};

pub const REWARD_EXIT: f64 = 10.0;
pub const REWARD_GOOD_ROCK: f64 = 10.0;
pub const REWARD_BAD_ROCK: f64 = -10.0;
pub const PENALTY: f64 = -100.0;
pub const SENSE_COST: f64 = 1.0;

/// Default sensor half-distance in cells.
pub const DEFAULT_D0: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RocksampleError {
    #[error("grid side n={0} must be at least 2")]
    GridTooSmall(usize),
    #[error("rock count m={m} must be in 1..={max}")]
    BadRockCount { m: usize, max: usize },
    #[error("d0={0} must be positive and finite")]
    BadD0(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocksampleConfig {
    pub n: usize,
    pub m: usize,
    pub d0: f64,
    /// Seeds rock placement.
    pub seed: u64,
}

impl RocksampleConfig {
    pub fn new(n: usize, m: usize, d0: f64, seed: u64) -> Result<Self, RocksampleError> {
        let cfg = Self { n, m, d0, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RocksampleError> {
        if self.n < 2 {
            return Err(RocksampleError::GridTooSmall(self.n));
        }
        if self.m == 0 || self.m > self.n * self.n {
            return Err(RocksampleError::BadRockCount { m: self.m, max: self.n * self.n });
        }
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(RocksampleError::BadD0(self.d0));
        }
        Ok(())
    }

    /// Same layout with a shifted sensor constant (training-simulator mismatch).
    pub fn with_d0(&self, d0: f64) -> Self {
        Self { d0, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocksampleAction {
    Up,
    Down,
    Left,
    Right,
    Sample,
    Sense(usize),
}

impl RocksampleAction {
    pub fn from_index(index: usize) -> Self {
        match index {
            0 => Self::Up,
            1 => Self::Down,
            2 => Self::Left,
            3 => Self::Right,
            4 => Self::Sample,
            i => Self::Sense(i - 5),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Up => 0,
            Self::Down => 1,
            Self::Left => 2,
            Self::Right => 3,
            Self::Sample => 4,
            Self::Sense(i) => 5 + i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rock {
    /// P(rock is good).
    pub belief: f64,
    pub collected: bool,
    /// `None` when hidden from the holder of the state.
    pub quality: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocksampleState {
    pub agent: (i32, i32),
    pub rocks: Vec<Rock>,
    pub exited: bool,
}

/// (2^{-d/d0} + 1) / 2.
pub fn sensor_accuracy(d: f64, d0: f64) -> f64 {
    (2f64.powf(-d / d0) + 1.0) / 2.0
}

/// Posterior P(good) after one sensor reading of the given accuracy.
pub fn belief_update(prior: f64, observed_good: bool, accuracy: f64) -> f64 {
    let (like_good, like_bad) = if observed_good {
        (accuracy, 1.0 - accuracy)
    } else {
        (1.0 - accuracy, accuracy)
    };
    let num = like_good * prior;
    let den = num + like_bad * (1.0 - prior);
    if den <= 0.0 {
        prior
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Rocksample {
    config: RocksampleConfig,
    rock_pos: Vec<(i32, i32)>,
}

impl Rocksample {
    pub fn new(config: RocksampleConfig) -> Result<Self, RocksampleError> {
        config.validate()?;
        let n = config.n;
        let mut rng = SimRng::seed_from_u64(mix(config.seed ^ 0x0C0C_4B5A));
        let rock_pos = sample(&mut rng, n * n, config.m)
            .into_iter()
            .map(|cell| ((cell % n) as i32, (cell / n) as i32))
            .collect();
        Ok(Self { config, rock_pos })
    }

    pub fn config(&self) -> &RocksampleConfig {
        &self.config
    }

    pub fn rock_positions(&self) -> &[(i32, i32)] {
        &self.rock_pos
    }

    pub fn start(&self) -> (i32, i32) {
        (0, (self.config.n / 2) as i32)
    }

    pub fn distance(&self, agent: (i32, i32), rock: usize) -> f64 {
        let (rx, ry) = self.rock_pos[rock];
        let dx = (agent.0 - rx) as f64;
        let dy = (agent.1 - ry) as f64;
        (dx * dx + dy * dy).sqrt()
    }

    fn rock_at(&self, cell: (i32, i32)) -> Option<usize> {
        self.rock_pos.iter().position(|&p| p == cell)
    }

    /// Initial state with rock qualities drawn good/bad with probability ½.
    pub fn initial(&self, rng: &mut SimRng) -> RocksampleState {
        let rocks = (0..self.config.m)
            .map(|_| Rock { belief: 0.5, collected: false, quality: Some(rng.gen_bool(0.5)) })
            .collect();
        RocksampleState { agent: self.start(), rocks, exited: false }
    }

    /// `[x/(n-1), y/(n-1)]` followed by `[belief, collected, distance/(n·√2)]` per rock.
    pub fn features_of(&self, state: &RocksampleState) -> Vec<f64> {
        let n = self.config.n as f64;
        let clampi = |v: i32| v.clamp(0, self.config.n as i32 - 1);
        let agent = (clampi(state.agent.0), clampi(state.agent.1));
        let mut out = Vec::with_capacity(self.feature_len());
        out.push(agent.0 as f64 / (n - 1.0));
        out.push(agent.1 as f64 / (n - 1.0));
        let scale = n * std::f64::consts::SQRT_2;
        for (i, rock) in state.rocks.iter().enumerate() {
            out.push(rock.belief);
            out.push(if rock.collected { 1.0 } else { 0.0 });
            out.push((self.distance(agent, i) / scale).min(1.0));
        }
        out
    }

    fn move_agent(&self, state: &RocksampleState, dx: i32, dy: i32) -> (f64, RocksampleState, bool) {
        let mut next = state.clone();
        let n = self.config.n as i32;
        let (x, y) = (state.agent.0 + dx, state.agent.1 + dy);
        next.agent = (x, y);
        if x >= n {
            next.exited = true;
            (REWARD_EXIT, next, true)
        } else if x < 0 || y < 0 || y >= n {
            next.exited = true;
            (PENALTY, next, true)
        } else {
            (0.0, next, false)
        }
    }
}

impl Environment for Rocksample {
    type State = RocksampleState;

    fn num_actions(&self) -> usize {
        5 + self.config.m
    }

    fn initial_state(&self, rng: &mut SimRng) -> RocksampleState {
        self.initial(rng)
    }

    /// Uniform over moves that stay on the grid or exit east, plus Sample on
    /// an uncollected rock. Sensing is left to the tree.
    fn rollout_action(&self, state: &RocksampleState, rng: &mut SimRng) -> usize {
        let n = self.config.n as i32;
        let (x, y) = state.agent;
        let mut legal = Vec::with_capacity(5);
        if y + 1 < n {
            legal.push(RocksampleAction::Up.index());
        }
        if y > 0 {
            legal.push(RocksampleAction::Down.index());
        }
        if x > 0 {
            legal.push(RocksampleAction::Left.index());
        }
        legal.push(RocksampleAction::Right.index());
        if self.rock_at(state.agent).is_some_and(|i| !state.rocks[i].collected) {
            legal.push(RocksampleAction::Sample.index());
        }
        legal[rng.gen_range(0..legal.len())]
    }

    fn step(&self, state: &RocksampleState, action: usize, rng: &mut SimRng) -> StepOutcome<RocksampleState> {
        let (reward, cost, next_state, terminal) = match RocksampleAction::from_index(action) {
            RocksampleAction::Up => {
                let (r, s, t) = self.move_agent(state, 0, 1);
                (r, 0.0, s, t)
            }
            RocksampleAction::Down => {
                let (r, s, t) = self.move_agent(state, 0, -1);
                (r, 0.0, s, t)
            }
            RocksampleAction::Left => {
                let (r, s, t) = self.move_agent(state, -1, 0);
                (r, 0.0, s, t)
            }
            RocksampleAction::Right => {
                let (r, s, t) = self.move_agent(state, 1, 0);
                (r, 0.0, s, t)
            }
            RocksampleAction::Sample => {
                let mut next = state.clone();
                let reward = match self.rock_at(state.agent) {
                    None => PENALTY,
                    Some(i) if next.rocks[i].collected => REWARD_BAD_ROCK,
                    Some(i) => {
                        let rock = &mut next.rocks[i];
                        let good = match rock.quality {
                            Some(q) => q,
                            None => rng.gen_bool(rock.belief),
                        };
                        rock.collected = true;
                        if good {
                            REWARD_GOOD_ROCK
                        } else {
                            REWARD_BAD_ROCK
                        }
                    }
                };
                (reward, 0.0, next, false)
            }
            RocksampleAction::Sense(i) => {
                let mut next = state.clone();
                let accuracy = sensor_accuracy(self.distance(state.agent, i), self.config.d0);
                let rock = &mut next.rocks[i];
                if !rock.collected {
                    let observed_good = match rock.quality {
                        Some(q) => {
                            if rng.gen_bool(accuracy) {
                                q
                            } else {
                                !q
                            }
                        }
                        None => {
                            let p = accuracy * rock.belief + (1.0 - accuracy) * (1.0 - rock.belief);
                            rng.gen_bool(p.clamp(0.0, 1.0))
                        }
                    };
                    rock.belief = belief_update(rock.belief, observed_good, accuracy);
                }
                (0.0, SENSE_COST, next, false)
            }
        };
        StepOutcome { reward, cost, next_state, terminal }
    }

    fn is_terminal(&self, state: &RocksampleState) -> bool {
        state.exited
    }

    fn planning_view(&self, state: &RocksampleState) -> RocksampleState {
        let mut view = state.clone();
        for rock in &mut view.rocks {
            rock.quality = None;
        }
        view
    }

    fn features(&self, state: &RocksampleState) -> Vec<f64> {
        self.features_of(state)
    }

    fn feature_len(&self) -> usize {
        2 + 3 * self.config.m
    }

    fn encoder_id(&self) -> String {
        format!("rocksample-v1:n={}:m={}:seed={}", self.config.n, self.config.m, self.config.seed)
    }
}
