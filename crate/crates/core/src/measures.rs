//! Information-theoretic uncertainty measures over a posterior ensemble.
//!
//! Every quantity is in nats. Two decompositions of total predictive
//! uncertainty share the same aleatoric term, the posterior-expected entropy
//! `E[H]` of the member predictive distributions:
//!
//! | decomposition | total | epistemic |
//! |---------------|-------|-----------|
//! | [`View::MiBased`] | `H(BMA)` | mutual information `I = Σᵢ wᵢ KL(pᵢ ‖ BMA)` |
//! | [`View::EpklBased`] | `Σᵢ wᵢ Σⱼ wⱼ CE(pᵢ, pⱼ)` | expected pairwise KL `K = Σᵢ Σⱼ wᵢ wⱼ KL(pᵢ ‖ pⱼ)` |
//!
//! The gap between the two epistemic terms is the reverse mutual information
//! `M = Σⱼ wⱼ KL(BMA ‖ pⱼ)`, so `K = I + M`.
//!
//! Zero probabilities are never clamped here. When a member puts mass on a
//! class another member rules out, `K` and `M` are `+∞` and are reported as
//! such.

use thiserror::Error;

use crate::nats::Nats;
use crate::sum::{compensated_sum, CompensatedSum};

/// Tolerance on `Σ p = 1` for a single predictive distribution.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;
/// Posterior weights within this distance of summing to one are renormalized;
/// anything further off is rejected.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;
/// Weight sums this close to one are kept bit-for-bit.
const WEIGHT_KEEP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("a categorical distribution needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("incompatible class counts: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("probability at index {index} is not a finite non-negative number: {value}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("an ensemble needs at least one member")]
    EmptyEnsemble,
    #[error("{weights} weights given for {members} members")]
    WeightCount { members: usize, weights: usize },
    #[error("weight at index {index} is not a finite non-negative number: {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("posterior weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("member index {index} out of range for an ensemble of {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A categorical predictive distribution `p(y | x, w)` over `K ≥ 2` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self, MeasureError> {
        if probs.len() < 2 {
            return Err(MeasureError::TooFewClasses(probs.len()));
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(MeasureError::InvalidProbability { index, value });
        }
        let sum = compensated_sum(probs.iter().copied());
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(Self { probs })
    }

    /// Two-class distribution `(θ, 1 − θ)`.
    pub fn bernoulli(theta: f64) -> Result<Self, MeasureError> {
        Self::new(vec![theta, 1.0 - theta])
    }

    pub(crate) fn from_trusted(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() >= 2);
        Self { probs }
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    /// Most probable class, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = k;
            }
        }
        best
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.probs
    }
}

/// `S` weighted predictive distributions for one input, the Monte-Carlo
/// stand-in for the model posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEnsemble {
    members: Vec<ProbabilityVector>,
    weights: Vec<f64>,
}

impl PosteriorEnsemble {
    /// Ensemble with uniform weights `1/S`.
    pub fn new(members: Vec<ProbabilityVector>) -> Result<Self, MeasureError> {
        let s = members.len();
        Self::check_members(&members)?;
        Ok(Self {
            members,
            weights: vec![1.0 / s as f64; s],
        })
    }

    pub fn with_weights(
        members: Vec<ProbabilityVector>,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        Self::check_members(&members)?;
        let weights = normalize_weights(weights, members.len())?;
        Ok(Self { members, weights })
    }

    /// Builds an ensemble from raw rows, each validated as a
    /// [`ProbabilityVector`].
    pub fn from_rows<I, R>(rows: I, weights: Option<Vec<f64>>) -> Result<Self, MeasureError>
    where
        I: IntoIterator<Item = R>,
        R: Into<Vec<f64>>,
    {
        let members = rows
            .into_iter()
            .map(|r| ProbabilityVector::new(r.into()))
            .collect::<Result<Vec<_>, _>>()?;
        match weights {
            Some(w) => Self::with_weights(members, w),
            None => Self::new(members),
        }
    }

    pub(crate) fn from_trusted(members: Vec<ProbabilityVector>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(members.len(), weights.len());
        Self { members, weights }
    }

    fn check_members(members: &[ProbabilityVector]) -> Result<(), MeasureError> {
        let first = members.first().ok_or(MeasureError::EmptyEnsemble)?;
        let k = first.num_classes();
        for m in &members[1..] {
            if m.num_classes() != k {
                return Err(MeasureError::DimensionMismatch {
                    left: k,
                    right: m.num_classes(),
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn members(&self) -> &[ProbabilityVector] {
        &self.members
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.members[0].num_classes()
    }

    /// Members that carry posterior mass, with their weights.
    fn supported(&self) -> impl Iterator<Item = (f64, &[f64])> + Clone {
        self.weights
            .iter()
            .zip(&self.members)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, m)| (*w, m.probs()))
    }

    /// True when all members with positive weight are entry-wise identical.
    fn members_agree(&self) -> bool {
        let mut it = self.supported().map(|(_, p)| p);
        match it.next() {
            Some(first) => it.all(|p| p == first),
            None => true,
        }
    }
}

/// Checks weight count and sign, then renormalizes sums within
/// [`WEIGHT_SUM_TOLERANCE`] of one.
pub(crate) fn normalize_weights(
    mut weights: Vec<f64>,
    members: usize,
) -> Result<Vec<f64>, MeasureError> {
    if weights.len() != members {
        return Err(MeasureError::WeightCount {
            members,
            weights: weights.len(),
        });
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
    {
        return Err(MeasureError::InvalidWeight { index, value });
    }
    let sum = compensated_sum(weights.iter().copied());
    let gap = (sum - 1.0).abs();
    if gap > WEIGHT_SUM_TOLERANCE {
        return Err(MeasureError::WeightsNotNormalized { sum });
    }
    if gap > WEIGHT_KEEP_TOLERANCE {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    Ok(weights)
}

fn entropy_of(p: &[f64]) -> f64 {
    -compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()))
}

/// `Σ p ln(p/q)`; `∞` when `q` rules out a class `p` supports.
fn kl_of(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (&pk, &qk) in p.iter().zip(q) {
        if pk > 0.0 {
            if qk == 0.0 {
                return f64::INFINITY;
            }
            acc.add(pk * (pk / qk).ln());
        }
    }
    acc.value()
}

fn cross_entropy_of(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (&pk, &qk) in p.iter().zip(q) {
        if pk > 0.0 {
            if qk == 0.0 {
                return f64::INFINITY;
            }
            acc.add(-pk * qk.ln());
        }
    }
    acc.value()
}

fn check_same_k(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<(), MeasureError> {
    if p.num_classes() != q.num_classes() {
        return Err(MeasureError::DimensionMismatch {
            left: p.num_classes(),
            right: q.num_classes(),
        });
    }
    Ok(())
}

/// Shannon entropy `H(p) = −Σ p ln p` with `0 ln 0 = 0`. Always finite.
pub fn entropy(p: &ProbabilityVector) -> Nats {
    Nats::from_rounded(entropy_of(p.probs()))
}

/// `D_KL(p ‖ q)`, infinite iff some class has `p > 0 = q`.
pub fn kl_divergence(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<Nats, MeasureError> {
    check_same_k(p, q)?;
    Ok(Nats::from_rounded(kl_of(p.probs(), q.probs())))
}

/// `CE(p, q) = −Σ p ln q`, which equals `H(p) + D_KL(p ‖ q)`.
pub fn cross_entropy(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<Nats, MeasureError> {
    check_same_k(p, q)?;
    Ok(Nats::from_rounded(cross_entropy_of(p.probs(), q.probs())))
}

/// Bayesian model average `Σᵢ wᵢ pᵢ`.
pub fn bma(ens: &PosteriorEnsemble) -> ProbabilityVector {
    let k = ens.num_classes();
    let probs = (0..k)
        .map(|c| compensated_sum(ens.supported().map(|(w, p)| w * p[c])))
        .collect();
    ProbabilityVector::from_trusted(probs)
}

/// Aleatoric term shared by both decompositions: `Σᵢ wᵢ H(pᵢ)`.
pub fn expected_entropy(ens: &PosteriorEnsemble) -> Nats {
    Nats::from_rounded(compensated_sum(
        ens.supported().map(|(w, p)| w * entropy_of(p)),
    ))
}

fn mutual_information_with(ens: &PosteriorEnsemble, bma: &[f64]) -> Nats {
    if ens.members_agree() {
        return Nats::ZERO;
    }
    Nats::from_rounded(compensated_sum(
        ens.supported().map(|(w, p)| w * kl_of(p, bma)),
    ))
}

/// Mutual information `Σᵢ wᵢ D_KL(pᵢ ‖ BMA)`, the epistemic term of the
/// BMA-entropy decomposition. Finite for every ensemble.
pub fn mutual_information(ens: &PosteriorEnsemble) -> Nats {
    mutual_information_with(ens, bma(ens).probs())
}

/// Expected pairwise KL divergence `Σᵢ Σⱼ wᵢ wⱼ D_KL(pᵢ ‖ pⱼ)`.
///
/// Evaluated in `O(SK)` through the weighted log-geometric mean
/// `Lₖ = Σⱼ wⱼ ln pⱼₖ`, since `Σⱼ wⱼ KL(pᵢ ‖ pⱼ) = Σₖ pᵢₖ (ln pᵢₖ − Lₖ)`.
/// Summed over `i` this is `−E[H] − Σₖ BMAₖ Lₖ`.
pub fn expected_pairwise_kl(ens: &PosteriorEnsemble) -> Nats {
    if ens.members_agree() {
        return Nats::ZERO;
    }
    let k = ens.num_classes();
    let mut log_mean = Vec::with_capacity(k);
    for c in 0..k {
        let mut acc = CompensatedSum::new();
        for (w, p) in ens.supported() {
            if p[c] == 0.0 {
                acc = CompensatedSum::new();
                acc.add(f64::NEG_INFINITY);
                break;
            }
            acc.add(w * p[c].ln());
        }
        log_mean.push(acc.value());
    }
    let mut total = CompensatedSum::new();
    for (w, p) in ens.supported() {
        for (c, &pc) in p.iter().enumerate() {
            if pc > 0.0 {
                if log_mean[c] == f64::NEG_INFINITY {
                    return Nats::INFINITY;
                }
                total.add(w * pc * (pc.ln() - log_mean[c]));
            }
        }
    }
    Nats::from_rounded(total.value())
}

/// Expected pairwise KL by the explicit `O(S²K)` double sum.
pub fn expected_pairwise_kl_pairwise(ens: &PosteriorEnsemble) -> Nats {
    let mut acc = CompensatedSum::new();
    for (wi, pi) in ens.supported() {
        for (wj, pj) in ens.supported() {
            let kl = kl_of(pi, pj);
            if kl.is_infinite() {
                return Nats::INFINITY;
            }
            acc.add(wi * wj * kl);
        }
    }
    Nats::from_rounded(acc.value())
}

fn reverse_mutual_information_with(ens: &PosteriorEnsemble, bma: &[f64]) -> Nats {
    if ens.members_agree() {
        return Nats::ZERO;
    }
    let mut acc = CompensatedSum::new();
    for (w, p) in ens.supported() {
        let kl = kl_of(bma, p);
        if kl.is_infinite() {
            return Nats::INFINITY;
        }
        acc.add(w * kl);
    }
    Nats::from_rounded(acc.value())
}

/// Reverse mutual information `Σⱼ wⱼ D_KL(BMA ‖ pⱼ)`.
pub fn reverse_mutual_information(ens: &PosteriorEnsemble) -> Nats {
    reverse_mutual_information_with(ens, bma(ens).probs())
}

/// Which decomposition of total uncertainty to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    /// `H(BMA) = E[H] + I`.
    MiBased,
    /// `E[H] + K`.
    EpklBased,
    /// `E[H] + K = H(BMA) + M`: the second slot holds the BMA entropy, which
    /// mixes aleatoric and epistemic uncertainty.
    RmiView,
}

impl View {
    pub const ALL: [View; 3] = [View::MiBased, View::EpklBased, View::RmiView];

    pub fn name(self) -> &'static str {
        match self {
            View::MiBased => "mi",
            View::EpklBased => "epkl",
            View::RmiView => "rmi",
        }
    }
}

/// Where an [`UncertaintyTriple`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Ensemble(View),
    /// Decomposition for one pre-selected member of the ensemble.
    SelectedModel { index: usize },
}

/// `(total, aleatoric, epistemic)` with `total` computed as the sum of the
/// other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyTriple {
    total: Nats,
    aleatoric: Nats,
    epistemic: Nats,
    source: Source,
}

impl UncertaintyTriple {
    pub fn new(aleatoric: Nats, epistemic: Nats, source: Source) -> Self {
        Self {
            total: aleatoric + epistemic,
            aleatoric,
            epistemic,
            source,
        }
    }

    pub fn total(&self) -> Nats {
        self.total
    }

    /// Second slot. Under [`View::RmiView`] this is not purely aleatoric; see
    /// [`UncertaintyTriple::aleatoric_is_exclusive`].
    pub fn aleatoric(&self) -> Nats {
        self.aleatoric
    }

    pub fn epistemic(&self) -> Nats {
        self.epistemic
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn aleatoric_is_exclusive(&self) -> bool {
        self.source != Source::Ensemble(View::RmiView)
    }
}

/// All ensemble-level quantities, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMeasures {
    pub bma: ProbabilityVector,
    pub expected_entropy: Nats,
    pub mutual_information: Nats,
    pub expected_pairwise_kl: Nats,
    pub reverse_mutual_information: Nats,
}

impl EnsembleMeasures {
    pub fn compute(ens: &PosteriorEnsemble) -> Self {
        let bma = bma(ens);
        let mutual_information = mutual_information_with(ens, bma.probs());
        let reverse_mutual_information = reverse_mutual_information_with(ens, bma.probs());
        Self {
            expected_entropy: expected_entropy(ens),
            expected_pairwise_kl: expected_pairwise_kl(ens),
            bma,
            mutual_information,
            reverse_mutual_information,
        }
    }

    pub fn triple(&self, view: View) -> UncertaintyTriple {
        let src = Source::Ensemble(view);
        match view {
            View::MiBased => {
                UncertaintyTriple::new(self.expected_entropy, self.mutual_information, src)
            }
            View::EpklBased => {
                UncertaintyTriple::new(self.expected_entropy, self.expected_pairwise_kl, src)
            }
            View::RmiView => UncertaintyTriple::new(
                self.expected_entropy + self.mutual_information,
                self.reverse_mutual_information,
                src,
            ),
        }
    }
}

/// Total / aleatoric / epistemic split of the ensemble under `view`.
///
/// ```
/// use uncq::measures::{decompose, PosteriorEnsemble, View};
///
/// let ens = PosteriorEnsemble::from_rows([vec![1.0, 0.0], vec![0.0, 1.0]], None).unwrap();
/// let mi = decompose(&ens, View::MiBased);
/// assert!((mi.epistemic().value() - std::f64::consts::LN_2).abs() < 1e-15);
/// assert!(decompose(&ens, View::EpklBased).epistemic().is_infinite());
/// ```
pub fn decompose(ens: &PosteriorEnsemble, view: View) -> UncertaintyTriple {
    EnsembleMeasures::compute(ens).triple(view)
}

/// Decomposition for a single pre-selected member `index`: total is the
/// expected cross-entropy against the posterior, aleatoric is the member's
/// own entropy and epistemic is its expected KL to the posterior.
pub fn model_conditional_uncertainty(
    index: usize,
    ens: &PosteriorEnsemble,
) -> Result<UncertaintyTriple, MeasureError> {
    let selected = ens.members().get(index).ok_or(MeasureError::IndexOutOfRange {
        index,
        len: ens.len(),
    })?;
    let p = selected.probs();
    let mut acc = CompensatedSum::new();
    for (w, q) in ens.supported() {
        if q == p {
            continue;
        }
        let kl = kl_of(p, q);
        if kl.is_infinite() {
            acc = CompensatedSum::new();
            acc.add(f64::INFINITY);
            break;
        }
        acc.add(w * kl);
    }
    Ok(UncertaintyTriple::new(
        entropy(selected),
        Nats::from_rounded(acc.value()),
        Source::SelectedModel { index },
    ))
}
