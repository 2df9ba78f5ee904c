//! Seeded random streams.
//!
//! Every source of randomness is derived from a master seed plus a purpose
//! label, so two runs with the same master seed replay bit-for-bit no matter
//! how work is scheduled across threads.
//!
//! Derivation uses the SplitMix64 finalizer:
//!
//! ```text
//! stream_seed(master, label)    = mix(master ^ mix(LABEL_SALT + label_code))
//! episode_seed(master, index)   = mix(master ^ mix(EPISODE_SALT + index))
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by environments, planners and training.
pub type SimRng = ChaCha8Rng;

const LABEL_SALT: u64 = 0x5EED_0000_0000_0000;
const EPISODE_SALT: u64 = 0xE915_0DE0_0000_0000;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for episode `index` under `master_seed`.
pub fn episode_seed(master_seed: u64, index: u64) -> u64 {
    mix(master_seed ^ mix(EPISODE_SALT.wrapping_add(index)))
}

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    Environment,
    Rollout,
    TieBreak,
    NetworkInit,
    DataShuffle,
}

impl StreamLabel {
    fn code(self) -> u64 {
        match self {
            StreamLabel::Environment => 1,
            StreamLabel::Rollout => 2,
            StreamLabel::TieBreak => 3,
            StreamLabel::NetworkInit => 4,
            StreamLabel::DataShuffle => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub label: StreamLabel,
}

impl RngStream {
    pub fn new(master_seed: u64, label: StreamLabel) -> Self {
        Self { master_seed, label }
    }

    pub fn seed(&self) -> u64 {
        mix(self.master_seed ^ mix(LABEL_SALT.wrapping_add(self.label.code())))
    }

    pub fn rng(&self) -> SimRng {
        SimRng::seed_from_u64(self.seed())
    }
}

/// The two streams a planner draws from during one episode.
#[derive(Debug, Clone)]
pub struct PlannerRng {
    /// Rollouts and stochastic transitions inside the tree.
    pub rollout: SimRng,
    /// Ties between unvisited children and between equally good final actions.
    pub tie_break: SimRng,
}

impl PlannerRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rollout: RngStream::new(seed, StreamLabel::Rollout).rng(),
            tie_break: RngStream::new(seed, StreamLabel::TieBreak).rng(),
        }
    }
}
