//! Experiment configuration.
//!
//! Files are TOML restricted to scalar and array values: top-level keys plus
//! one level of `[section]` tables. Every value is addressed by its dotted
//! key (`search.uct_c`, `train.alpha0`), which is also the form accepted by
//! `--set key=value` overrides. Unknown keys are rejected. Relative paths
//! are taken from the working directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use cmcts_core::ccmcp::{CcmcpConfig, FinalAction};
use cmcts_core::cmcts::TrainLoopConfig;
use cmcts_core::critic::TrainConfig;
use cmcts_core::env::{GridworldConfig, Layout, RocksampleConfig};
use cmcts_core::mcts::PlannerConfig;
use toml::Value;

use crate::HarnessError;

/// Every accepted key with a one-line description, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("environment", "rocksample | gridworld"),
    ("planner", "mcts | ccmcp | cmcts"),
    ("iteration_sweep", "planning-iteration budgets"),
    ("episodes", "episodes per budget"),
    ("master_seed", "seed every episode is derived from"),
    ("output_dir", "directory for CSV and plot files"),
    ("gamma", "discount factor"),
    ("c_hat", "cost constraint"),
    ("max_episode_steps", "step cap per episode"),
    ("parallel", "fan episodes out to worker threads"),
    ("rocksample.n", "grid side"),
    ("rocksample.m", "rock count"),
    ("rocksample.d0", "sensor half-distance of the real environment"),
    ("rocksample.d0_delta", "added to d0 in the training simulator"),
    ("rocksample.seed", "rock placement seed"),
    ("gridworld.wind_p", "wind probability of the real environment"),
    ("gridworld.model_wind_p", "wind probability of the planning model"),
    ("gridworld.sim_wind_p", "wind probability of the training simulator"),
    ("gridworld.layout_path", "layout file"),
    ("gridworld.seed", "environment seed"),
    ("search.iterations", "budget used by evaluate and visitation-map"),
    ("search.uct_c", "UCT exploration constant"),
    ("search.rollout_depth_max", "rollout depth cap"),
    ("mcts.lambda", "fixed scalarization weight"),
    ("ccmcp.step_size_base", "λ step size base"),
    ("ccmcp.lambda_max", "λ upper bound"),
    ("ccmcp.lambda_init", "λ at the start of an episode"),
    ("ccmcp.track_budget", "shrink ĉ by incurred cost"),
    ("ccmcp.final_action", "feasible | max_visits"),
    ("cmcts.critic_checkpoint_path", "critic checkpoint"),
    ("cmcts.sigma_max", "deployment trust threshold, overrides the checkpoint"),
    ("cmcts.prune_slack", "margin added to ĉ before pruning"),
    ("cmcts.track_budget", "shrink ĉ by incurred cost"),
    ("train.alpha0", "λ schedule step size"),
    ("train.epsilon", "convergence band below ĉ"),
    ("train.sigma_max", "trust threshold stored with the critic"),
    ("train.train_iterations", "planning iterations while collecting"),
    ("train.episodes_per_mdp", "episodes per λ"),
    ("train.max_outer_loops", "λ schedule length"),
    ("train.lambda_init", "first λ"),
    ("train.lambda_max", "λ upper bound"),
    ("train.uct_c", "UCT constant while collecting"),
    ("train.prune_slack", "margin of the evaluation planner"),
    ("train.k", "ensemble size"),
    ("train.hidden", "hidden layer widths"),
    ("train.learning_rate", "Adam step size"),
    ("train.batch_size", "minibatch size"),
    ("train.epochs", "epochs per fit"),
    ("compare.planners", "planners run by compare"),
];

/// Dotted key → value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatConfig {
    values: BTreeMap<String, Value>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let table: toml::Table = text.parse().map_err(|e| HarnessError::Config(format!("{e}")))?;
        let mut values = BTreeMap::new();
        for (key, value) in table {
            match value {
                Value::Table(section) => {
                    for (sub, v) in section {
                        if v.is_table() {
                            return Err(HarnessError::Config(format!("{key}.{sub}: nested tables are not supported")));
                        }
                        values.insert(format!("{key}.{sub}"), v);
                    }
                }
                v => {
                    values.insert(key, v);
                }
            }
        }
        let config = Self { values };
        config.check_keys()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key=value`. The value is read as TOML, or as a bare string
    /// when that fails.
    pub fn set(&mut self, assignment: &str) -> Result<(), HarnessError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override {assignment:?} is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.values.insert(key.to_string(), value);
        self.check_keys()
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    fn check_keys(&self) -> Result<(), HarnessError> {
        match self.values.keys().find(|k| !KEYS.iter().any(|(known, _)| known == k)) {
            Some(k) => Err(HarnessError::Config(format!("unknown key {k:?}"))),
            None => Ok(()),
        }
    }

    fn wrong(key: &str, want: &str, v: &Value) -> HarnessError {
        HarnessError::Config(format!("{key}: expected {want}, found {v}"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, HarnessError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Float(x)) => Ok(*x),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(v) => Err(Self::wrong(key, "a number", v)),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, HarnessError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(v) => Err(Self::wrong(key, "a non-negative integer", v)),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, HarnessError> {
        self.u64_or(key, default as u64).map(|v| v as usize)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, HarnessError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(v) => Err(Self::wrong(key, "true or false", v)),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, HarnessError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::String(s)) => Ok(s),
            Some(v) => Err(Self::wrong(key, "a string", v)),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, HarnessError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                    v => Err(Self::wrong(key, "a list of non-negative integers", v)),
                })
                .collect(),
            Some(v) => Err(Self::wrong(key, "a list", v)),
        }
    }

    pub fn str_list_or(&self, key: &str, default: &[&str]) -> Result<Vec<String>, HarnessError> {
        match self.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| Self::wrong(key, "a list of strings", v)))
                .collect(),
            Some(v) => Err(Self::wrong(key, "a list", v)),
        }
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>, HarnessError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(PathBuf::from(s))),
            Some(v) => Err(Self::wrong(key, "a path string", v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlannerKind {
    Mcts,
    Ccmcp,
    Cmcts,
}

impl PlannerKind {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "mcts" => Ok(Self::Mcts),
            "ccmcp" => Ok(Self::Ccmcp),
            "cmcts" => Ok(Self::Cmcts),
            other => Err(HarnessError::Config(format!("unknown planner {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mcts => "mcts",
            Self::Ccmcp => "ccmcp",
            Self::Cmcts => "cmcts",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Environment plus its training-simulator and planning-model variants.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvConfig {
    /// Real dynamics use `config.d0`; the training simulator uses `d0 + d0_delta`.
    Rocksample { config: RocksampleConfig, d0_delta: f64 },
    /// Real dynamics use `config.wind_p`.
    Gridworld { config: GridworldConfig, model_wind_p: f64, sim_wind_p: f64 },
}

impl EnvConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rocksample { .. } => "rocksample",
            Self::Gridworld { .. } => "gridworld",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub planner: PlannerKind,
    pub iteration_sweep: Vec<usize>,
    pub episodes: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub gamma: f64,
    pub c_hat: f64,
    pub max_episode_steps: usize,
    pub parallel: bool,
    /// Shared search settings; `iterations` is the single-budget default.
    pub search: PlannerConfig,
    pub ccmcp: CcmcpConfig,
    pub critic_checkpoint_path: Option<PathBuf>,
    pub deploy_sigma_max: Option<f64>,
    pub prune_slack: f64,
    pub cmcts_track_budget: bool,
    pub train: TrainLoopConfig,
    pub compare_planners: Vec<PlannerKind>,
}

pub const DEFAULT_SWEEP: [usize; 7] = [128, 256, 512, 1024, 2048, 4096, 8192];

impl ExperimentConfig {
    /// `default_output_dir` applies when the file has no `output_dir`.
    pub fn from_flat(flat: &FlatConfig, default_output_dir: &Path) -> Result<Self, HarnessError> {
        let gamma = flat.f64_or("gamma", 0.95)?;
        let env = match flat.str_or("environment", "rocksample")? {
            "rocksample" => {
                let n = flat.usize_or("rocksample.n", 5)?;
                let m = flat.usize_or("rocksample.m", 7)?;
                let d0 = flat.f64_or("rocksample.d0", cmcts_core::env::rocksample::DEFAULT_D0)?;
                let seed = flat.u64_or("rocksample.seed", 0)?;
                let config = RocksampleConfig::new(n, m, d0, seed).map_err(|e| HarnessError::Config(e.to_string()))?;
                let d0_delta = flat.f64_or("rocksample.d0_delta", 0.0)?;
                if !(d0 + d0_delta > 0.0) {
                    return Err(HarnessError::Config(format!("d0 + d0_delta = {} must be positive", d0 + d0_delta)));
                }
                EnvConfig::Rocksample { config, d0_delta }
            }
            "gridworld" => {
                let layout = match flat.path("gridworld.layout_path")? {
                    Some(p) => Layout::load(&p).map_err(|e| HarnessError::Config(e.to_string()))?,
                    None => Layout::default_layout(),
                };
                let wind_p = flat.f64_or("gridworld.wind_p", 0.2)?;
                let seed = flat.u64_or("gridworld.seed", 0)?;
                let config =
                    GridworldConfig::new(wind_p, layout, seed).map_err(|e| HarnessError::Config(e.to_string()))?;
                let model_wind_p = flat.f64_or("gridworld.model_wind_p", wind_p)?;
                let sim_wind_p = flat.f64_or("gridworld.sim_wind_p", wind_p)?;
                for w in [model_wind_p, sim_wind_p] {
                    config.with_wind(w).map_err(|e| HarnessError::Config(e.to_string()))?;
                }
                EnvConfig::Gridworld { config, model_wind_p, sim_wind_p }
            }
            other => return Err(HarnessError::Config(format!("unknown environment {other:?}"))),
        };

        let mut search = PlannerConfig::new(gamma).with_iterations(flat.usize_or("search.iterations", 1024)?);
        search.uct_c = flat.f64_or("search.uct_c", search.uct_c)?;
        search.rollout_depth_max = flat.usize_or("search.rollout_depth_max", search.rollout_depth_max)?;
        search.lambda = flat.f64_or("mcts.lambda", 0.0)?;
        search.validate().map_err(|e| HarnessError::Config(e.to_string()))?;

        let defaults = CcmcpConfig::default();
        let ccmcp = CcmcpConfig {
            step_size_base: flat.f64_or("ccmcp.step_size_base", defaults.step_size_base)?,
            lambda_max: flat.f64_or("ccmcp.lambda_max", defaults.lambda_max)?,
            lambda_init: flat.f64_or("ccmcp.lambda_init", defaults.lambda_init)?,
            track_budget: flat.bool_or("ccmcp.track_budget", defaults.track_budget)?,
            final_action: match flat.str_or("ccmcp.final_action", "feasible")? {
                "feasible" => FinalAction::FeasibleMaxVisits,
                "max_visits" => FinalAction::MaxVisits,
                other => return Err(HarnessError::Config(format!("unknown ccmcp.final_action {other:?}"))),
            },
        };

        let train_defaults = TrainConfig::default();
        let mut train = TrainLoopConfig::new(
            flat.f64_or("train.alpha0", 8.0)?,
            flat.f64_or("train.epsilon", 0.1)?,
            flat.f64_or("train.sigma_max", 0.5)?,
            flat.usize_or("train.train_iterations", 1024)?,
        );
        train.episodes_per_mdp = flat.usize_or("train.episodes_per_mdp", train.episodes_per_mdp)?;
        train.max_outer_loops = flat.usize_or("train.max_outer_loops", train.max_outer_loops)?;
        train.lambda_init = flat.f64_or("train.lambda_init", train.lambda_init)?;
        train.lambda_max = flat.f64_or("train.lambda_max", train.lambda_max)?;
        train.uct_c = flat.f64_or("train.uct_c", search.uct_c)?;
        train.prune_slack = flat.f64_or("train.prune_slack", 0.0)?;
        train.master_seed = flat.u64_or("master_seed", 0)?;
        train.train = TrainConfig {
            learning_rate: flat.f64_or("train.learning_rate", train_defaults.learning_rate)?,
            batch_size: flat.usize_or("train.batch_size", train_defaults.batch_size)?,
            epochs: flat.usize_or("train.epochs", train_defaults.epochs)?,
            k: flat.usize_or("train.k", train_defaults.k)?,
            hidden_dims: flat.usize_list_or("train.hidden", &train_defaults.hidden_dims)?,
            ..train_defaults
        };

        let output_dir = match flat.get("output_dir") {
            Some(_) => flat.path("output_dir")?.expect("present"),
            None => default_output_dir.to_path_buf(),
        };
        let config = Self {
            env,
            planner: PlannerKind::parse(flat.str_or("planner", "mcts")?)?,
            iteration_sweep: flat.usize_list_or("iteration_sweep", &DEFAULT_SWEEP)?,
            episodes: flat.usize_or("episodes", 100)?,
            master_seed: flat.u64_or("master_seed", 0)?,
            output_dir,
            gamma,
            c_hat: flat.f64_or("c_hat", 1.0)?,
            max_episode_steps: flat.usize_or("max_episode_steps", 200)?,
            parallel: flat.bool_or("parallel", true)?,
            search,
            ccmcp,
            critic_checkpoint_path: flat.path("cmcts.critic_checkpoint_path")?,
            deploy_sigma_max: flat.get("cmcts.sigma_max").map(|_| flat.f64_or("cmcts.sigma_max", 0.0)).transpose()?,
            prune_slack: flat.f64_or("cmcts.prune_slack", 0.0)?,
            cmcts_track_budget: flat.bool_or("cmcts.track_budget", true)?,
            train,
            compare_planners: flat
                .str_list_or("compare.planners", &["mcts", "ccmcp", "cmcts"])?
                .iter()
                .map(|s| PlannerKind::parse(s))
                .collect::<Result<_, _>>()?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.iteration_sweep.is_empty() || self.iteration_sweep.contains(&0) {
            return bad(format!("iteration_sweep {:?} must be non-empty and positive", self.iteration_sweep));
        }
        if self.episodes == 0 {
            return bad("episodes must be at least 1".into());
        }
        if !(self.c_hat >= 0.0) {
            return bad(format!("c_hat {} must be non-negative", self.c_hat));
        }
        if self.deploy_sigma_max.is_some_and(|s| !(s >= 0.0)) || !(self.prune_slack >= 0.0) {
            return bad("cmcts.sigma_max and cmcts.prune_slack must be non-negative".into());
        }
        if !(self.ccmcp.step_size_base > 0.0 && self.ccmcp.lambda_init >= 0.0 && self.ccmcp.lambda_max >= self.ccmcp.lambda_init)
        {
            return bad(format!("invalid ccmcp settings {:?}", self.ccmcp));
        }
        self.spec_for(1).map(|_| ())?;
        self.train.validate(self.c_hat).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn spec_for(&self, num_actions: usize) -> Result<cmcts_core::cmdp::CmdpSpec, HarnessError> {
        cmcts_core::cmdp::CmdpSpec::new(self.gamma, vec![self.c_hat], num_actions, self.max_episode_steps)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Search settings at `iterations`.
    pub fn planner_config(&self, iterations: usize) -> PlannerConfig {
        self.search.clone().with_iterations(iterations)
    }

    pub fn with_planner(&self, planner: PlannerKind) -> Self {
        Self { planner, ..self.clone() }
    }

    pub fn load(path: &Path, overrides: &[String], default_output_dir: &Path) -> Result<Self, HarnessError> {
        let mut flat = FlatConfig::load(path)?;
        for o in overrides {
            flat.set(o)?;
        }
        Self::from_flat(&flat, default_output_dir)
    }
}
