//! K independently initialized cost-Q networks aggregated into a mean and a
//! population standard deviation per action.

use super::network::QNetwork;
use super::CriticError;
use crate::rng::{mix, RngStream, StreamLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticEnsemble {
    members: Vec<QNetwork>,
    sigma_max: f64,
    encoder_id: String,
}

impl CriticEnsemble {
    /// `k` members over `layer_dims`, member `i` initialized from its own stream.
    pub fn new(
        k: usize,
        layer_dims: &[usize],
        sigma_max: f64,
        encoder_id: impl Into<String>,
        seed: u64,
    ) -> Result<Self, CriticError> {
        let members = (0..k)
            .map(|i| {
                let mut rng = RngStream::new(mix(seed ^ mix(i as u64)), StreamLabel::NetworkInit).rng();
                QNetwork::new(layer_dims, &mut rng)
            })
            .collect();
        Self::from_members(members, sigma_max, encoder_id)
    }

    pub fn from_members(
        members: Vec<QNetwork>,
        sigma_max: f64,
        encoder_id: impl Into<String>,
    ) -> Result<Self, CriticError> {
        let Some(first) = members.first() else {
            return Err(CriticError::Config("ensemble needs at least one member".into()));
        };
        if members.iter().any(|m| m.layer_dims() != first.layer_dims()) {
            return Err(CriticError::Dimension("members disagree on layer dims".into()));
        }
        if !(sigma_max >= 0.0) {
            return Err(CriticError::Config(format!("sigma_max {sigma_max} must be non-negative")));
        }
        Ok(Self { members, sigma_max, encoder_id: encoder_id.into() })
    }

    pub fn members(&self) -> &[QNetwork] {
        &self.members
    }

    pub fn members_mut(&mut self) -> &mut [QNetwork] {
        &mut self.members
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        self.members[0].layer_dims()
    }

    pub fn num_actions(&self) -> usize {
        self.members[0].num_outputs()
    }

    pub fn feature_len(&self) -> usize {
        self.members[0].input_len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn set_sigma_max(&mut self, sigma_max: f64) {
        assert!(sigma_max >= 0.0);
        self.sigma_max = sigma_max;
    }

    pub fn with_sigma_max(mut self, sigma_max: f64) -> Self {
        self.set_sigma_max(sigma_max);
        self
    }

    pub fn encoder_id(&self) -> &str {
        &self.encoder_id
    }

    /// Errors unless the ensemble was built for this encoder and action count.
    pub fn check_compatible(&self, encoder_id: &str, feature_len: usize, num_actions: usize) -> Result<(), CriticError> {
        if self.encoder_id != encoder_id {
            return Err(CriticError::Dimension(format!(
                "critic encoder {:?} does not match environment encoder {:?}",
                self.encoder_id, encoder_id
            )));
        }
        if self.feature_len() != feature_len || self.num_actions() != num_actions {
            return Err(CriticError::Dimension(format!(
                "critic maps {} features to {} actions, environment has {} and {}",
                self.feature_len(),
                self.num_actions(),
                feature_len,
                num_actions
            )));
        }
        Ok(())
    }

    /// Per-action mean and population standard deviation across members.
    pub fn predict(&self, features: &[f64]) -> Vec<Prediction> {
        let outputs: Vec<Vec<f64>> = self.members.iter().map(|m| m.forward(features)).collect();
        let k = outputs.len() as f64;
        (0..self.num_actions())
            .map(|a| {
                // deviations from the first member keep identical members at sigma exactly 0
                let base = outputs[0][a];
                let (s1, s2) = outputs.iter().fold((0.0, 0.0), |(s1, s2), o| {
                    let d = o[a] - base;
                    (s1 + d, s2 + d * d)
                });
                let mean_d = s1 / k;
                let var = (s2 / k - mean_d * mean_d).max(0.0);
                Prediction { mu: base + mean_d, sigma: var.sqrt() }
            })
            .collect()
    }

    /// Actions whose prediction is trusted, `sigma ≤ sigma_max`.
    pub fn trusted(&self, features: &[f64]) -> Vec<bool> {
        self.predict(features).iter().map(|p| p.sigma <= self.sigma_max).collect()
    }
}
