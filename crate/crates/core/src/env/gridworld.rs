//! Safe Gridworld: reach the goal while avoiding unsafe cells, with a band of
//! windy cells that push the agent one cell down.
//!
//! Layout files are plain text, one line per row, top row first, using
//! `S` start, `G` goal, `U` unsafe, `W` windy and `.` safe. Coordinates are
//! `(x, y)` with `(0, 0)` the bottom-left cell and `y` growing upwards.

use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::cmdp::{Environment, StepOutcome};
use crate::rng::SimRng;

pub const REWARD_GOAL: f64 = 100.0;
pub const PENALTY_EXIT: f64 = -1000.0;
pub const REWARD_STEP: f64 = -1.0;
pub const UNSAFE_COST: f64 = 1.0;

/// The shipped 8×8 layout.
pub const DEFAULT_LAYOUT: &str = include_str!("../../layouts/safe_gridworld.txt");

/// Move offsets indexed by action: N, NE, E, SE, S, SW, W, NW, stay.
pub const MOVES: [(i32, i32); 9] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 0),
];

#[derive(Debug, Error)]
pub enum GridworldError {
    #[error("layout is empty")]
    Empty,
    #[error("layout row {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("unknown layout character {ch:?} at row {row}, column {col}")]
    BadChar { ch: char, row: usize, col: usize },
    #[error("layout needs exactly one goal cell, found {0}")]
    GoalCount(usize),
    #[error("layout needs at least one start cell")]
    NoStart,
    #[error("wind probability {0} outside [0, 1]")]
    BadWind(f64),
    #[error("reading layout {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Safe,
    Unsafe,
    Windy,
    Start,
    Goal,
}

impl Cell {
    fn from_char(ch: char) -> Option<Self> {
        Some(match ch {
            '.' => Cell::Safe,
            'U' => Cell::Unsafe,
            'W' => Cell::Windy,
            'S' => Cell::Start,
            'G' => Cell::Goal,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            Cell::Safe => '.',
            Cell::Unsafe => 'U',
            Cell::Windy => 'W',
            Cell::Start => 'S',
            Cell::Goal => 'G',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    width: usize,
    height: usize,
    /// Row-major from the bottom row: index = y * width + x.
    cells: Vec<Cell>,
}

impl Layout {
    pub fn parse(text: &str) -> Result<Self, GridworldError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(GridworldError::Empty);
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut cells = vec![Cell::Safe; width * height];
        for (row, line) in rows.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(GridworldError::Ragged { row, found, expected: width });
            }
            let y = height - 1 - row;
            for (col, ch) in line.chars().enumerate() {
                cells[y * width + col] =
                    Cell::from_char(ch).ok_or(GridworldError::BadChar { ch, row, col })?;
            }
        }
        let goals = cells.iter().filter(|c| **c == Cell::Goal).count();
        if goals != 1 {
            return Err(GridworldError::GoalCount(goals));
        }
        if !cells.contains(&Cell::Start) {
            return Err(GridworldError::NoStart);
        }
        Ok(Self { width, height, cells })
    }

    pub fn load(path: &Path) -> Result<Self, GridworldError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| GridworldError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn default_layout() -> Self {
        Self::parse(DEFAULT_LAYOUT).expect("shipped layout is valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, (x, y): (i32, i32)) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn cell(&self, (x, y): (i32, i32)) -> Cell {
        self.cells[y as usize * self.width + x as usize]
    }

    pub fn index(&self, (x, y): (i32, i32)) -> usize {
        y as usize * self.width + x as usize
    }

    pub fn cells_of(&self, kind: Cell) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        for y in 0..self.height as i32 {
            for x in 0..self.width as i32 {
                if self.cell((x, y)) == kind {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Windy cells that can blow the agent into an unsafe cell.
    pub fn risky_windy_cells(&self) -> Vec<(i32, i32)> {
        self.cells_of(Cell::Windy)
            .into_iter()
            .filter(|&(x, y)| self.contains((x, y - 1)) && self.cell((x, y - 1)) == Cell::Unsafe)
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in (0..self.height as i32).rev() {
            for x in 0..self.width as i32 {
                out.push(self.cell((x, y)).to_char());
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridworldConfig {
    pub wind_p: f64,
    pub layout: Layout,
    /// Picks among several start cells; unused with a single start.
    pub seed: u64,
}

impl GridworldConfig {
    pub fn new(wind_p: f64, layout: Layout, seed: u64) -> Result<Self, GridworldError> {
        if !(0.0..=1.0).contains(&wind_p) {
            return Err(GridworldError::BadWind(wind_p));
        }
        Ok(Self { wind_p, layout, seed })
    }

    pub fn with_wind(&self, wind_p: f64) -> Result<Self, GridworldError> {
        Self::new(wind_p, self.layout.clone(), self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridworldState {
    pub pos: (i32, i32),
    pub terminal: bool,
}

impl GridworldState {
    /// Terminal because the agent left the grid.
    pub fn exited(&self, layout: &Layout) -> bool {
        self.terminal && !layout.contains(self.pos)
    }
}

#[derive(Debug, Clone)]
pub struct SafeGridworld {
    config: GridworldConfig,
    starts: Vec<(i32, i32)>,
}

impl SafeGridworld {
    pub fn new(config: GridworldConfig) -> Self {
        let starts = config.layout.cells_of(Cell::Start);
        Self { config, starts }
    }

    pub fn config(&self) -> &GridworldConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.config.layout
    }

    pub fn state_at(&self, pos: (i32, i32)) -> GridworldState {
        GridworldState { pos, terminal: false }
    }

    /// One-hot cell encoding; all zeros once the agent has left the grid.
    pub fn features_of(&self, state: &GridworldState) -> Vec<f64> {
        let layout = &self.config.layout;
        let mut out = vec![0.0; layout.width * layout.height];
        if layout.contains(state.pos) {
            out[layout.index(state.pos)] = 1.0;
        }
        out
    }
}

impl Environment for SafeGridworld {
    type State = GridworldState;

    fn num_actions(&self) -> usize {
        MOVES.len()
    }

    fn initial_state(&self, rng: &mut SimRng) -> GridworldState {
        let pos = if self.starts.len() == 1 {
            self.starts[0]
        } else {
            self.starts[rng.gen_range(0..self.starts.len())]
        };
        self.state_at(pos)
    }

    fn step(&self, state: &GridworldState, action: usize, rng: &mut SimRng) -> StepOutcome<GridworldState> {
        let layout = &self.config.layout;
        let (x, y) = state.pos;
        let wind_p = self.config.wind_p;
        let blown = layout.cell(state.pos) == Cell::Windy
            && (wind_p >= 1.0 || (wind_p > 0.0 && rng.gen_bool(wind_p)));
        let (dx, dy) = if blown { (0, -1) } else { MOVES[action] };
        let pos = (x + dx, y + dy);
        if !layout.contains(pos) {
            return StepOutcome {
                reward: PENALTY_EXIT,
                cost: 0.0,
                next_state: GridworldState { pos, terminal: true },
                terminal: true,
            };
        }
        let cell = layout.cell(pos);
        let cost = if cell == Cell::Unsafe { UNSAFE_COST } else { 0.0 };
        let terminal = cell == Cell::Goal;
        let reward = if terminal { REWARD_GOAL } else { REWARD_STEP };
        StepOutcome { reward, cost, next_state: GridworldState { pos, terminal }, terminal }
    }

    fn is_terminal(&self, state: &GridworldState) -> bool {
        state.terminal
    }

    /// Uniform over moves whose intended cell is inside the grid.
    fn rollout_action(&self, state: &GridworldState, rng: &mut SimRng) -> usize {
        let (x, y) = state.pos;
        let legal: Vec<usize> = (0..MOVES.len())
            .filter(|&a| self.config.layout.contains((x + MOVES[a].0, y + MOVES[a].1)))
            .collect();
        if legal.is_empty() {
            rng.gen_range(0..MOVES.len())
        } else {
            legal[rng.gen_range(0..legal.len())]
        }
    }

    fn features(&self, state: &GridworldState) -> Vec<f64> {
        self.features_of(state)
    }

    fn feature_len(&self) -> usize {
        self.config.layout.width * self.config.layout.height
    }

    fn encoder_id(&self) -> String {
        format!("gridworld-v1:{}x{}", self.config.layout.width, self.config.layout.height)
    }
}
