//! Offline TD training of the ensemble on logged transitions.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::ensemble::CriticEnsemble;
use super::network::{Adam, QNetwork};
use super::CriticError;
use crate::cmdp::{Environment, EpisodeRecord};
use crate::rng::{mix, RngStream, StreamLabel};

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSample {
    pub features: Vec<f64>,
    pub action: usize,
    pub cost: f64,
    pub next_features: Vec<f64>,
    /// Action actually taken in the successor state; `None` on the last
    /// transition of an episode.
    pub next_action: Option<usize>,
    pub terminal: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionDataset {
    samples: Vec<TransitionSample>,
}

impl TransitionDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[TransitionSample] {
        &self.samples
    }

    pub fn push(&mut self, sample: TransitionSample) {
        self.samples.push(sample);
    }

    pub fn extend(&mut self, other: TransitionDataset) {
        self.samples.extend(other.samples);
    }

    /// Encodes every transition of `record` with `env`'s feature map.
    pub fn append_episode<E: Environment>(&mut self, env: &E, record: &EpisodeRecord<E::State>) {
        for t in &record.transitions {
            self.samples.push(TransitionSample {
                features: env.features(&t.state),
                action: t.action,
                cost: t.cost,
                next_features: env.features(&t.next_state),
                next_action: t.next_action,
                terminal: t.terminal,
            });
        }
    }
}

/// How bootstrap targets are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSync {
    /// Bootstrap from the live network.
    None,
    /// Bootstrap from a copy frozen at the start of each epoch.
    EpochSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub k: usize,
    pub hidden_dims: Vec<usize>,
    pub seed: u64,
    pub target_sync: TargetSync,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 50,
            k: 5,
            hidden_dims: vec![64, 64],
            seed: 0,
            target_sync: TargetSync::EpochSnapshot,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CriticError> {
        let ok = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.epochs > 0
            && self.k > 0
            && self.hidden_dims.iter().all(|&h| h > 0);
        if ok {
            Ok(())
        } else {
            Err(CriticError::Config(format!("invalid training config {self:?}")))
        }
    }

    /// `[feature_len, hidden.., num_actions]`.
    pub fn layer_dims(&self, feature_len: usize, num_actions: usize) -> Vec<usize> {
        let mut dims = vec![feature_len];
        dims.extend(&self.hidden_dims);
        dims.push(num_actions);
        dims
    }
}

/// One-step on-policy target `c + γ·Q(s', a')`, clamped at 0. Terminal
/// transitions, and the last transition of a truncated episode, use `c` alone.
pub fn td_target(sample: &TransitionSample, gamma: f64, q_next: impl FnOnce(&[f64], usize) -> f64) -> f64 {
    let target = match (sample.terminal, sample.next_action) {
        (false, Some(a)) => sample.cost + gamma * q_next(&sample.next_features, a),
        _ => sample.cost,
    };
    target.max(0.0)
}

/// Mean loss per epoch for each member (`trace[member][epoch]`).
pub type LossTrace = Vec<Vec<f64>>;

/// Trains every member in place from its current weights.
pub fn train(
    ensemble: &mut CriticEnsemble,
    dataset: &TransitionDataset,
    config: &TrainConfig,
    gamma: f64,
) -> Result<LossTrace, CriticError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(CriticError::EmptyDataset);
    }
    let width = ensemble.feature_len();
    let actions = ensemble.num_actions();
    if let Some(bad) = dataset.samples().iter().find(|s| {
        s.features.len() != width || s.next_features.len() != width || s.action >= actions
    }) {
        return Err(CriticError::Dimension(format!(
            "sample with {} features and action {} does not fit a critic over {width} features and {actions} actions",
            bad.features.len(),
            bad.action
        )));
    }
    ensemble
        .members_mut()
        .par_iter_mut()
        .enumerate()
        .map(|(i, member)| train_member(member, i, dataset.samples(), config, gamma))
        .collect()
}

fn train_member(
    net: &mut QNetwork,
    index: usize,
    samples: &[TransitionSample],
    config: &TrainConfig,
    gamma: f64,
) -> Result<Vec<f64>, CriticError> {
    let mut rng = RngStream::new(mix(config.seed ^ mix(index as u64)), StreamLabel::DataShuffle).rng();
    let mut adam = Adam::new(net.params().len(), config.learning_rate);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    let mut targets = vec![0.0; samples.len()];
    for epoch in 0..config.epochs {
        let snapshot = net.clone();
        if config.target_sync == TargetSync::EpochSnapshot {
            for (t, s) in targets.iter_mut().zip(samples) {
                *t = td_target(s, gamma, |x, a| snapshot.forward(x)[a]);
            }
        }
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            if config.target_sync == TargetSync::None {
                for &i in chunk {
                    targets[i] = td_target(&samples[i], gamma, |x, a| net.forward(x)[a]);
                }
            }
            let batch: Vec<(&[f64], usize, f64)> =
                chunk.iter().map(|&i| (samples[i].features.as_slice(), samples[i].action, targets[i])).collect();
            let (loss, grad) = net.loss_and_grad(&batch);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(CriticError::NonFinite { member: index, epoch, loss });
            }
            total += loss * chunk.len() as f64;
            adam.step(net.params_mut(), &grad);
        }
        trace.push(total / samples.len() as f64);
    }
    Ok(trace)
}
