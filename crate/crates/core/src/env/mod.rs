//! Benchmark environments.

pub mod bandit;
pub mod gridworld;
pub mod rocksample;

pub use bandit::Bandit;
pub use gridworld::{Cell, GridworldConfig, GridworldState, Layout, SafeGridworld};
pub use rocksample::{Rocksample, RocksampleAction, RocksampleConfig, RocksampleState};
