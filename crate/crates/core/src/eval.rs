//! Detection and selective-prediction metrics over uncertainty scores.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::estimator::{score_batch, Component, EnsembleBatch, MeasureTable};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("need at least one positive and one negative record ({positives} positive, {negatives} negative)")]
    MissingClass { positives: usize, negatives: usize },
    #[error("empty record set")]
    Empty,
    #[error("score for {0:?} is NaN")]
    NanScore(String),
    #[error("identifier {0:?} has no ground-truth label")]
    MissingTruth(String),
    #[error("label {label} for {id:?} is not a class index below {classes}")]
    LabelOutOfRange { id: String, label: usize, classes: usize },
    #[error("class count mismatch: {left} vs {right}")]
    ClassMismatch { left: usize, right: usize },
    #[error("split {index} is empty")]
    EmptySplit { index: usize },
    #[error("split count must be at least 1")]
    NoSplits,
    #[error("{requested} inputs per split over {splits} splits exceed the {available} available")]
    SplitTooLarge {
        requested: usize,
        splits: usize,
        available: usize,
    },
}

/// `(identifier, score, flag)`.
pub type Record = (String, f64, bool);

/// Records `(id, score, positive)`. Scores may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    records: Vec<Record>,
}

impl ScoredSet {
    pub fn new(records: Vec<Record>) -> Result<Self, EvalError> {
        if let Some((id, _, _)) = records.iter().find(|r| r.1.is_nan()) {
            return Err(EvalError::NanScore(id.clone()));
        }
        let positives = records.iter().filter(|r| r.2).count();
        let negatives = records.len() - positives;
        if positives == 0 || negatives == 0 {
            return Err(EvalError::MissingClass {
                positives,
                negatives,
            });
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }
}

/// Area under the ROC curve: the probability that a random positive scores
/// above a random negative, ties counting one half.
///
/// ```
/// use uncq::eval::{auroc, ScoredSet};
/// let set = ScoredSet::new(vec![
///     ("a".into(), 0.1, false),
///     ("b".into(), 0.3, true),
///     ("c".into(), f64::INFINITY, true),
///     ("d".into(), 0.3, false),
/// ]).unwrap();
/// assert_eq!(auroc(&set), 0.875);
/// ```
pub fn auroc(set: &ScoredSet) -> f64 {
    let mut order: Vec<(f64, bool)> = set.records.iter().map(|r| (r.1, r.2)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Midranks are multiples of ½, so the rank sum is exact.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && order[j + 1].0 == order[i].0 {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0;
        let pos = order[i..=j].iter().filter(|r| r.1).count();
        rank_sum += midrank * pos as f64;
        i = j + 1;
    }
    let n_pos = set.records.iter().filter(|r| r.2).count() as f64;
    let n_neg = set.records.len() as f64 - n_pos;
    (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}

/// Records `(id, uncertainty, correct)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveSet {
    records: Vec<Record>,
}

impl SelectiveSet {
    pub fn new(records: Vec<Record>) -> Result<Self, EvalError> {
        if records.is_empty() {
            return Err(EvalError::Empty);
        }
        if let Some((id, _, _)) = records.iter().find(|r| r.1.is_nan()) {
            return Err(EvalError::NanScore(id.clone()));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn accuracy(&self) -> f64 {
        self.records.iter().filter(|r| r.2).count() as f64 / self.records.len() as f64
    }
}

/// Accuracy among the `m` most certain records for `m = 1..=n`, ordered by
/// uncertainty and then by identifier.
pub fn accuracy_coverage_curve(set: &SelectiveSet) -> Vec<(f64, f64)> {
    let mut order: Vec<&Record> = set.records.iter().collect();
    order.sort_by(|a, b| match a.1.total_cmp(&b.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    let n = order.len() as f64;
    let mut correct = 0usize;
    order
        .iter()
        .enumerate()
        .map(|(i, r)| {
            correct += r.2 as usize;
            ((i + 1) as f64 / n, correct as f64 / (i + 1) as f64)
        })
        .collect()
}

/// Trapezoidal area under the accuracy–coverage curve on `[0, 1]`. The curve
/// is extended to coverage 0 at the accuracy of the single most certain
/// record.
pub fn selective_prediction_auc(set: &SelectiveSet) -> f64 {
    let curve = accuracy_coverage_curve(set);
    let mut area = 0.0;
    let mut prev = (0.0, curve[0].1);
    for &(x, y) in &curve {
        area += (x - prev.0) * (y + prev.1) / 2.0;
        prev = (x, y);
    }
    area
}

/// Ground-truth labels keyed by input identifier.
pub type Truth = HashMap<String, usize>;

/// Builds the misclassification task for one component: each input is
/// correct when its BMA arg-max equals the truth label, and misclassified
/// inputs are the positives of the returned [`ScoredSet`].
pub fn misclassification_sets(
    table: &MeasureTable,
    truth: &Truth,
    classes: usize,
    component: Component,
) -> Result<(SelectiveSet, Vec<Record>), EvalError> {
    let mut records = Vec::with_capacity(table.len());
    for row in &table.rows {
        let label = *truth
            .get(&row.id)
            .ok_or_else(|| EvalError::MissingTruth(row.id.clone()))?;
        if label >= classes {
            return Err(EvalError::LabelOutOfRange {
                id: row.id.clone(),
                label,
                classes,
            });
        }
        records.push((
            row.id.clone(),
            row.get(component).value(),
            row.prediction == label,
        ));
    }
    let selective = SelectiveSet::new(records.clone())?;
    let scored = records.into_iter().map(|(id, s, ok)| (id, s, !ok)).collect();
    Ok((selective, scored))
}

/// How inputs are split for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub count: usize,
    /// Inputs per split; defaults to an equal share of all inputs.
    pub per_split: Option<usize>,
    pub seed: u64,
}

impl SplitSpec {
    pub const DEFAULT_COUNT: usize = 3;

    pub fn new(seed: u64) -> Self {
        Self {
            count: Self::DEFAULT_COUNT,
            per_split: None,
            seed,
        }
    }

    /// Disjoint index sets drawn from a seeded shuffle of `0..n`, each sorted.
    pub fn partition(&self, n: usize) -> Result<Vec<Vec<usize>>, EvalError> {
        if self.count == 0 {
            return Err(EvalError::NoSplits);
        }
        let size = self.per_split.unwrap_or(n / self.count);
        if size == 0 {
            return Err(EvalError::EmptySplit { index: 0 });
        }
        if size * self.count > n {
            return Err(EvalError::SplitTooLarge {
                requested: size,
                splits: self.count,
                available: n,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        SeededRng::new(self.seed).shuffle(&mut order);
        Ok(order
            .chunks_exact(size)
            .take(self.count)
            .map(|c| {
                let mut c = c.to_vec();
                c.sort_unstable();
                c
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Detection,
    Misclassification,
    Selective,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Detection => "detection",
            Task::Misclassification => "misclassification",
            Task::Selective => "selective",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSummary {
    pub component: Component,
    pub split_values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single split.
    pub std: f64,
}

impl ComponentSummary {
    fn new(component: Component, split_values: Vec<f64>) -> Self {
        let n = split_values.len() as f64;
        let lo = split_values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = split_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = (split_values.iter().sum::<f64>() / n).clamp(lo, hi);
        let std = if split_values.len() < 2 {
            0.0
        } else {
            (split_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self {
            component,
            split_values,
            mean,
            std,
        }
    }
}

/// Per-component split values with mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub task: Task,
    pub method: String,
    pub components: Vec<ComponentSummary>,
}

impl DetectionReport {
    pub fn get(&self, component: Component) -> Option<&ComponentSummary> {
        self.components.iter().find(|c| c.component == component)
    }
}

fn summarize<F>(
    task: Task,
    method: &str,
    splits: usize,
    metric: F,
) -> Result<DetectionReport, EvalError>
where
    F: Fn(usize, Component) -> Result<f64, EvalError> + Sync,
{
    let values: Vec<Vec<f64>> = (0..splits)
        .into_par_iter()
        .map(|s| {
            Component::REPORTED
                .iter()
                .map(|&c| metric(s, c))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let components = Component::REPORTED
        .iter()
        .enumerate()
        .map(|(ci, &c)| ComponentSummary::new(c, values.iter().map(|v| v[ci]).collect()))
        .collect();
    Ok(DetectionReport {
        task,
        method: method.to_string(),
        components,
    })
}

/// AUROC of every reported component with anomalous inputs as positives.
/// Each split pairs a disjoint seeded subset of the in-distribution inputs
/// with all anomalous inputs.
pub fn run_detection(
    in_dist: &EnsembleBatch,
    anomalous: &EnsembleBatch,
    splits: &SplitSpec,
    method: &str,
) -> Result<DetectionReport, EvalError> {
    if in_dist.classes() != anomalous.classes() {
        return Err(EvalError::ClassMismatch {
            left: in_dist.classes(),
            right: anomalous.classes(),
        });
    }
    detection_from_tables(&score_batch(in_dist), &score_batch(anomalous), splits, method)
}

/// [`run_detection`] on already scored inputs.
pub fn detection_from_tables(
    in_dist: &MeasureTable,
    anomalous: &MeasureTable,
    splits: &SplitSpec,
    method: &str,
) -> Result<DetectionReport, EvalError> {
    if anomalous.is_empty() {
        return Err(EvalError::MissingClass {
            positives: 0,
            negatives: in_dist.len(),
        });
    }
    let parts = splits.partition(in_dist.len())?;
    summarize(Task::Detection, method, parts.len(), |s, c| {
        let records = parts[s]
            .iter()
            .map(|&i| &in_dist.rows[i])
            .map(|r| (r.id.clone(), r.get(c).value(), false))
            .chain(
                anomalous
                    .rows
                    .iter()
                    .map(|r| (r.id.clone(), r.get(c).value(), true)),
            )
            .collect();
        Ok(auroc(&ScoredSet::new(records)?))
    })
}

fn check_truth(table: &MeasureTable, truth: &Truth) -> Result<(), EvalError> {
    match table.rows.iter().find(|r| !truth.contains_key(&r.id)) {
        Some(r) => Err(EvalError::MissingTruth(r.id.clone())),
        None => Ok(()),
    }
}

/// AUROC for separating misclassified (positive) from correct inputs, over
/// disjoint seeded splits of the inputs.
pub fn run_misclassification(
    table: &MeasureTable,
    truth: &Truth,
    classes: usize,
    splits: &SplitSpec,
    method: &str,
) -> Result<DetectionReport, EvalError> {
    check_truth(table, truth)?;
    let parts = splits.partition(table.len())?;
    summarize(Task::Misclassification, method, parts.len(), |s, c| {
        let sub = subtable(table, &parts[s]);
        let (_, scored) = misclassification_sets(&sub, truth, classes, c)?;
        Ok(auroc(&ScoredSet::new(scored)?))
    })
}

/// Accuracy–coverage AUC over disjoint seeded splits of the inputs.
pub fn run_selective(
    table: &MeasureTable,
    truth: &Truth,
    classes: usize,
    splits: &SplitSpec,
    method: &str,
) -> Result<DetectionReport, EvalError> {
    check_truth(table, truth)?;
    let parts = splits.partition(table.len())?;
    summarize(Task::Selective, method, parts.len(), |s, c| {
        let sub = subtable(table, &parts[s]);
        let (selective, _) = misclassification_sets(&sub, truth, classes, c)?;
        Ok(selective_prediction_auc(&selective))
    })
}

fn subtable(table: &MeasureTable, indices: &[usize]) -> MeasureTable {
    MeasureTable {
        rows: indices.iter().map(|&i| table.rows[i].clone()).collect(),
    }
}
