//! Softmax linear policies over sparse binary features, with the two
//! gradient computations used in training: the cross-entropy gradient
//! against search visit distributions, and the value-estimate policy
//! gradient (summed over all legal actions, no baseline).

use crate::features::{extract, FeatureSet, SparseFeatureVector};
use crate::game::{Action, GameState, Rules};
use crate::training::ExperienceEntry;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("feature dimension {feature} exceeds parameter length {params}")]
    DimensionMismatch { feature: usize, params: usize },
    #[error("visit distribution sums to {0}, expected 1")]
    InvalidDistribution(f64),
    #[error("entry stores {got} value estimates for {expected} actions")]
    MissingValues { got: usize, expected: usize },
    #[error("empty batch")]
    EmptyBatch,
}

/// Dense trainable weights, one slot per feature index. Grows with zeros
/// when the feature set grows.
#[derive(Clone, PartialEq, Debug)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(dim: usize) -> Self {
        ParameterVector(vec![0.0; dim])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extend_to(&mut self, dim: usize) {
        if dim > self.0.len() {
            self.0.resize(dim, 0.0);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A policy's parameterisation: a base vector, optionally boosted by an
/// offset vector. Effective logits use `base + offset` elementwise.
#[derive(Clone, PartialEq, Debug)]
pub struct PolicySpec {
    pub base: ParameterVector,
    pub offset: Option<ParameterVector>,
}

impl PolicySpec {
    pub fn base_only(base: ParameterVector) -> Self {
        PolicySpec { base, offset: None }
    }

    pub fn boosted(base: ParameterVector, offset: ParameterVector) -> Self {
        PolicySpec {
            base,
            offset: Some(offset),
        }
    }

    pub fn param_len(&self) -> usize {
        self.base.len()
    }

    #[inline]
    fn weight(&self, i: usize) -> f64 {
        let mut w = self.base.0[i];
        if let Some(off) = &self.offset {
            w += off.0[i];
        }
        w
    }

    /// Logit per feature vector: the sum of effective weights over active
    /// indices. Errors when a feature vector outgrows the parameters.
    pub fn logits(&self, feats: &[SparseFeatureVector]) -> Result<Vec<f64>, PolicyError> {
        let n = self.param_len();
        if let Some(off) = &self.offset {
            debug_assert_eq!(off.len(), n, "offset must match base length");
        }
        feats
            .iter()
            .map(|f| {
                if f.dimension as usize > n {
                    return Err(PolicyError::DimensionMismatch {
                        feature: f.dimension as usize,
                        params: n,
                    });
                }
                Ok(f.active.iter().map(|&i| self.weight(i as usize)).sum())
            })
            .collect()
    }

    /// Softmax action distribution for a legal action list.
    pub fn distribution(
        &self,
        rules: &dyn Rules,
        state: &GameState,
        actions: &[Action],
        fs: &FeatureSet,
    ) -> Result<ActionDistribution, PolicyError> {
        let feats: Vec<SparseFeatureVector> = actions
            .iter()
            .map(|&a| extract(rules, state, a, fs))
            .collect();
        self.distribution_from_features(&feats)
    }

    pub fn distribution_from_features(
        &self,
        feats: &[SparseFeatureVector],
    ) -> Result<ActionDistribution, PolicyError> {
        Ok(ActionDistribution(softmax(&self.logits(feats)?)))
    }
}

/// Probabilities aligned with the canonical legal-action ordering.
#[derive(Clone, PartialEq, Debug)]
pub struct ActionDistribution(Vec<f64>);

impl ActionDistribution {
    /// Wrap an explicit probability vector; must sum to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self, PolicyError> {
        let sum: f64 = probs.iter().sum();
        if probs.is_empty() || (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| p < 0.0) {
            return Err(PolicyError::InvalidDistribution(sum));
        }
        Ok(ActionDistribution(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// Entropy divided by ln(number of actions); 0 for a single action.
    pub fn normalized_entropy(&self) -> f64 {
        if self.0.len() < 2 {
            return 0.0;
        }
        self.entropy() / (self.0.len() as f64).ln()
    }
}

/// Numerically stable softmax (max-logit subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Sample an action index proportional to the distribution.
pub fn sample_action<R: Rng>(dist: &ActionDistribution, rng: &mut R) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in dist.probs().iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    dist.len() - 1
}

/// Lowest index among the maxima (canonical tie-break).
pub fn greedy_action(dist: &ActionDistribution) -> usize {
    let mut best = 0;
    for (i, &p) in dist.probs().iter().enumerate() {
        if p > dist.probs()[best] {
            best = i;
        }
    }
    best
}

/// Gradient of the cross-entropy loss between the policy's distribution and
/// the stored visit distribution, over one experience entry. The returned
/// vector has length `dim` (the current parameter length); coordinates not
/// touched by any stored feature stay 0.
pub fn ce_gradient(
    ps: &PolicySpec,
    entry: &ExperienceEntry,
    dim: usize,
) -> Result<Vec<f64>, PolicyError> {
    let target = entry.visit_distribution.probs();
    let sum: f64 = target.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(PolicyError::InvalidDistribution(sum));
    }
    let probs = ps.distribution_from_features(&entry.features_per_action)?;
    let mut grad = vec![0.0; dim];
    for (a, feats) in entry.features_per_action.iter().enumerate() {
        let coef = probs.probs()[a] - target[a];
        for &i in &feats.active {
            grad[i as usize] += coef;
        }
    }
    Ok(grad)
}

/// Batch policy-gradient estimate from stored value estimates, averaged over
/// the batch and summed over all legal actions per state. Returned as an
/// ascent direction; negate for a descent-form optimizer.
pub fn tspg_gradient(
    ps: &PolicySpec,
    batch: &[&ExperienceEntry],
    dim: usize,
) -> Result<Vec<f64>, PolicyError> {
    if batch.is_empty() {
        return Err(PolicyError::EmptyBatch);
    }
    let mut grad = vec![0.0; dim];
    for entry in batch {
        if entry.q_values.len() != entry.features_per_action.len() {
            return Err(PolicyError::MissingValues {
                got: entry.q_values.len(),
                expected: entry.features_per_action.len(),
            });
        }
        let probs = ps.distribution_from_features(&entry.features_per_action)?;
        let p = probs.probs();
        let expected_q: f64 = p
            .iter()
            .zip(&entry.q_values)
            .map(|(&pa, &qa)| pa * qa)
            .sum();
        // sum_a q(a) * grad pi(a) = sum_a p(a) (q(a) - E_p[q]) phi(a)
        for (a, feats) in entry.features_per_action.iter().enumerate() {
            let coef = p[a] * (entry.q_values[a] - expected_q);
            for &i in &feats.active {
                grad[i as usize] += coef;
            }
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for g in &mut grad {
        *g *= scale;
    }
    Ok(grad)
}

/// Analytic gradient of the softmax probability of action `a` with respect
/// to every parameter: `pi(a) * (phi_i(a) - sum_b pi(b) phi_i(b))`.
pub fn softmax_prob_gradient(
    probs: &[f64],
    feats: &[SparseFeatureVector],
    dim: usize,
    a: usize,
) -> Vec<f64> {
    let mut expected_phi = vec![0.0; dim];
    for (b, f) in feats.iter().enumerate() {
        for &i in &f.active {
            expected_phi[i as usize] += probs[b];
        }
    }
    let mut grad: Vec<f64> = expected_phi.iter().map(|&e| -probs[a] * e).collect();
    for &i in &feats[a].active {
        grad[i as usize] += probs[a];
    }
    grad
}
