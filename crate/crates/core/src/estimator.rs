//! Batched scoring of many inputs, each with its own posterior ensemble.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::measures::{
    normalize_weights, EnsembleMeasures, MeasureError, PosteriorEnsemble, ProbabilityVector,
    UncertaintyTriple, View,
};
use crate::nats::Nats;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid batch shape: {0}")]
    Shape(String),
    #[error("duplicate input identifier {0:?}")]
    DuplicateId(String),
    #[error("input {input}, member {member}: {source}")]
    Row {
        input: usize,
        member: usize,
        source: MeasureError,
    },
    #[error("posterior weights: {0}")]
    Weights(MeasureError),
    #[error("clamp epsilon {epsilon} must lie in [0, 1/K) for K = {classes}")]
    Epsilon { epsilon: f64, classes: usize },
    #[error("subset size {size} is not in 1..={members}")]
    SubsetSize { size: usize, members: usize },
    #[error("at least 2 resamples per size are needed, got {0}")]
    TooFewResamples(usize),
    #[error("{0} is infinite on a subsample; dispersion is undefined")]
    NonFinite(Component),
}

/// `N` inputs × `S` posterior samples × `K` classes of predictive
/// probabilities, stored row-major as `[input][member][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleBatch {
    inputs: usize,
    members: usize,
    classes: usize,
    probs: Vec<f64>,
    weights: Option<Vec<f64>>,
    ids: Vec<String>,
}

impl EnsembleBatch {
    /// Validates every `(input, member)` row as a probability vector. Without
    /// `ids`, inputs are named by their index.
    pub fn new(
        inputs: usize,
        members: usize,
        classes: usize,
        probs: Vec<f64>,
        weights: Option<Vec<f64>>,
        ids: Option<Vec<String>>,
    ) -> Result<Self, EstimatorError> {
        if inputs == 0 || members == 0 {
            return Err(EstimatorError::Shape(format!(
                "need N >= 1 and S >= 1, got N = {inputs}, S = {members}"
            )));
        }
        if classes < 2 {
            return Err(EstimatorError::Shape(format!("need K >= 2, got K = {classes}")));
        }
        let expected = inputs
            .checked_mul(members)
            .and_then(|x| x.checked_mul(classes))
            .ok_or_else(|| EstimatorError::Shape("N * S * K overflows".into()))?;
        if probs.len() != expected {
            return Err(EstimatorError::Shape(format!(
                "expected {expected} probabilities, got {}",
                probs.len()
            )));
        }
        let ids = match ids {
            Some(ids) => {
                if ids.len() != inputs {
                    return Err(EstimatorError::Shape(format!(
                        "{} identifiers for {inputs} inputs",
                        ids.len()
                    )));
                }
                let mut seen = HashSet::with_capacity(ids.len());
                for id in &ids {
                    if !seen.insert(id.as_str()) {
                        return Err(EstimatorError::DuplicateId(id.clone()));
                    }
                }
                ids
            }
            None => (0..inputs).map(|i| i.to_string()).collect(),
        };
        let weights = weights
            .map(|w| normalize_weights(w, members))
            .transpose()
            .map_err(EstimatorError::Weights)?;
        for (r, row) in probs.chunks_exact(classes).enumerate() {
            ProbabilityVector::new(row.to_vec()).map_err(|source| EstimatorError::Row {
                input: r / members,
                member: r % members,
                source,
            })?;
        }
        Ok(Self {
            inputs,
            members,
            classes,
            probs,
            weights,
            ids,
        })
    }

    /// Single-input batch holding `ens`.
    pub fn from_ensemble(ens: &PosteriorEnsemble, id: impl Into<String>) -> Self {
        let probs = ens.members().iter().flat_map(|m| m.probs().iter().copied()).collect();
        Self {
            inputs: 1,
            members: ens.len(),
            classes: ens.num_classes(),
            probs,
            weights: Some(ens.weights().to_vec()),
            ids: vec![id.into()],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Explicit posterior weights, if any (uniform otherwise).
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Probabilities of one member for one input.
    pub fn row(&self, input: usize, member: usize) -> &[f64] {
        let start = (input * self.members + member) * self.classes;
        &self.probs[start..start + self.classes]
    }

    pub fn ensemble(&self, input: usize) -> PosteriorEnsemble {
        let members = (0..self.members)
            .map(|s| ProbabilityVector::from_trusted(self.row(input, s).to_vec()))
            .collect();
        let weights = self
            .weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.members as f64; self.members]);
        PosteriorEnsemble::from_trusted(members, weights)
    }

    /// The inputs at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> EnsembleBatch {
        let stride = self.members * self.classes;
        let probs = indices
            .iter()
            .flat_map(|&i| self.probs[i * stride..(i + 1) * stride].iter().copied())
            .collect();
        Self {
            inputs: indices.len(),
            members: self.members,
            classes: self.classes,
            probs,
            weights: self.weights.clone(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }
}

/// Floors every probability at `epsilon` and renormalizes each row.
/// `epsilon = 0` returns the batch unchanged.
pub fn clamp(batch: &EnsembleBatch, epsilon: f64) -> Result<EnsembleBatch, EstimatorError> {
    let k = batch.classes;
    if !(epsilon >= 0.0 && epsilon < 1.0 / k as f64) {
        return Err(EstimatorError::Epsilon {
            epsilon,
            classes: k,
        });
    }
    if epsilon == 0.0 {
        return Ok(batch.clone());
    }
    let mut probs = batch.probs.clone();
    for row in probs.chunks_exact_mut(k) {
        row.iter_mut().for_each(|p| *p = p.max(epsilon));
        let sum = crate::sum::compensated_sum(row.iter().copied());
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(EnsembleBatch {
        probs,
        ..batch.clone()
    })
}

/// Scalar columns of a [`MeasureRow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    /// Entropy of the BMA.
    MiTotal,
    /// Expected entropy plus expected pairwise KL.
    EpklTotal,
    /// Expected entropy, shared by both decompositions.
    Aleatoric,
    MiEpistemic,
    EpklEpistemic,
    /// Reverse mutual information.
    Rmi,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::MiTotal,
        Component::EpklTotal,
        Component::Aleatoric,
        Component::MiEpistemic,
        Component::EpklEpistemic,
        Component::Rmi,
    ];

    /// The five columns reported for detection tasks.
    pub const REPORTED: [Component; 5] = [
        Component::MiTotal,
        Component::EpklTotal,
        Component::Aleatoric,
        Component::MiEpistemic,
        Component::EpklEpistemic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::MiTotal => "mi_total",
            Component::EpklTotal => "epkl_total",
            Component::Aleatoric => "aleatoric",
            Component::MiEpistemic => "mi_epistemic",
            Component::EpklEpistemic => "epkl_epistemic",
            Component::Rmi => "rmi",
        }
    }

    fn of(self, m: &EnsembleMeasures) -> Nats {
        match self {
            Component::MiTotal => m.expected_entropy + m.mutual_information,
            Component::EpklTotal => m.expected_entropy + m.expected_pairwise_kl,
            Component::Aleatoric => m.expected_entropy,
            Component::MiEpistemic => m.mutual_information,
            Component::EpklEpistemic => m.expected_pairwise_kl,
            Component::Rmi => m.reverse_mutual_information,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scores for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub id: String,
    /// Arg-max of the BMA, lowest class index on ties.
    pub prediction: usize,
    pub mi: UncertaintyTriple,
    pub epkl: UncertaintyTriple,
    pub rmi: Nats,
}

impl MeasureRow {
    fn from_measures(id: String, m: &EnsembleMeasures) -> Self {
        Self {
            id,
            prediction: m.bma.argmax(),
            mi: m.triple(View::MiBased),
            epkl: m.triple(View::EpklBased),
            rmi: m.reverse_mutual_information,
        }
    }

    pub fn get(&self, component: Component) -> Nats {
        match component {
            Component::MiTotal => self.mi.total(),
            Component::EpklTotal => self.epkl.total(),
            Component::Aleatoric => self.mi.aleatoric(),
            Component::MiEpistemic => self.mi.epistemic(),
            Component::EpklEpistemic => self.epkl.epistemic(),
            Component::Rmi => self.rmi,
        }
    }

    /// `|K − (I + M)|` relative to `max(1, K)`, or `None` when `K` is infinite.
    pub fn identity_residual(&self) -> Option<f64> {
        let k = self.epkl.epistemic();
        if k.is_infinite() {
            return None;
        }
        let sum = self.mi.epistemic().value() + self.rmi.value();
        Some((k.value() - sum).abs() / k.value().max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureTable {
    pub rows: Vec<MeasureRow>,
}

impl MeasureTable {
    pub fn column(&self, component: Component) -> Vec<Nats> {
        self.rows.iter().map(|r| r.get(component)).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn score_row(batch: &EnsembleBatch, i: usize) -> MeasureRow {
    MeasureRow::from_measures(
        batch.ids[i].clone(),
        &EnsembleMeasures::compute(&batch.ensemble(i)),
    )
}

/// Scores every input in parallel. Row `i` of the table always belongs to
/// input `i`.
pub fn score_batch(batch: &EnsembleBatch) -> MeasureTable {
    MeasureTable {
        rows: (0..batch.inputs)
            .into_par_iter()
            .map(|i| score_row(batch, i))
            .collect(),
    }
}

/// Single-threaded [`score_batch`].
pub fn score_batch_serial(batch: &EnsembleBatch) -> MeasureTable {
    MeasureTable {
        rows: (0..batch.inputs).map(|i| score_row(batch, i)).collect(),
    }
}

/// Mean and sample standard deviation of every [`Component`] over the
/// resamples at one subset size.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub size: usize,
    mean: [f64; 6],
    std: [f64; 6],
}

impl ConvergencePoint {
    pub fn mean(&self, c: Component) -> f64 {
        self.mean[Self::slot(c)]
    }

    pub fn std(&self, c: Component) -> f64 {
        self.std[Self::slot(c)]
    }

    fn slot(c: Component) -> usize {
        Component::ALL.iter().position(|&x| x == c).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub resamples: usize,
    pub points: Vec<ConvergencePoint>,
}

impl ConvergenceReport {
    /// `std(size_i) / std(size_{i+1})` for consecutive sizes.
    pub fn dispersion_ratios(&self, c: Component) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| w[0].std(c) / w[1].std(c))
            .collect()
    }

    /// Checks that dispersion falls at least like `1/√S'` up to `slack`:
    /// between consecutive sizes the ratio must reach
    /// `√(size_{i+1} / size_i) / slack`. A zero dispersion must stay zero.
    pub fn follows_inverse_sqrt(&self, c: Component, slack: f64) -> bool {
        self.points.windows(2).all(|w| {
            let (a, b) = (w[0].std(c), w[1].std(c));
            if a == 0.0 {
                return b == 0.0;
            }
            let expected = (w[1].size as f64 / w[0].size as f64).sqrt();
            a / b >= expected / slack
        })
    }
}

/// Subsamples `size` members without replacement `resamples` times per size
/// and summarizes the spread of each measure. Member order inside a subsample
/// follows the original ensemble, so `size = S` always reproduces the full
/// ensemble exactly.
pub fn convergence_report(
    ens: &PosteriorEnsemble,
    sizes: &[usize],
    resamples: usize,
    seed: u64,
) -> Result<ConvergenceReport, EstimatorError> {
    if resamples < 2 {
        return Err(EstimatorError::TooFewResamples(resamples));
    }
    let s = ens.len();
    if let Some(&size) = sizes.iter().find(|&&z| z == 0 || z > s) {
        return Err(EstimatorError::SubsetSize { size, members: s });
    }
    let mut rng = SeededRng::new(seed);
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut acc = [Welford::default(); 6];
        for _ in 0..resamples {
            let mut idx = rng.sample_indices(s, size);
            idx.sort_unstable();
            let members = idx.iter().map(|&i| ens.members()[i].clone()).collect();
            let raw: Vec<f64> = idx.iter().map(|&i| ens.weights()[i]).collect();
            let total = crate::sum::compensated_sum(raw.iter().copied());
            let weights = if total > 0.0 {
                raw.iter().map(|w| w / total).collect()
            } else {
                vec![1.0 / size as f64; size]
            };
            let m = EnsembleMeasures::compute(&PosteriorEnsemble::from_trusted(members, weights));
            for (slot, c) in Component::ALL.iter().enumerate() {
                let v = c.of(&m);
                if v.is_infinite() {
                    return Err(EstimatorError::NonFinite(*c));
                }
                acc[slot].push(v.value());
            }
        }
        points.push(ConvergencePoint {
            size,
            mean: acc.map(|w| w.mean),
            std: acc.map(|w| w.sample_std()),
        });
    }
    Ok(ConvergenceReport { resamples, points })
}

/// Running mean and variance; exact for constant input.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn sample_std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }
}
