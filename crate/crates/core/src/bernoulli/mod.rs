//! Uncertainty measures for posteriors over the parameter `θ` of a single
//! Bernoulli outcome.
//!
//! With no input and no model, the posterior over `θ` *is* the posterior
//! ensemble, and every measure reduces to one-dimensional expectations:
//!
//! * aleatoric `AU = E[H(θ)]`, by quadrature (or exact sums for point masses);
//! * the BMA is `Bern(E[θ])`, so the mutual-information total is `H(E[θ])`;
//! * the expected pairwise KL only needs the log-moments `E[ln θ]` and
//!   `E[ln(1 − θ)]`, which have closed forms:
//!   `K = −AU − E[θ]·E[ln θ] − E[1 − θ]·E[ln(1 − θ)]`;
//! * the reverse mutual information is `M = −H(E[θ]) − E[θ]·E[ln θ] − E[1 − θ]·E[ln(1 − θ)]`.
//!
//! An atom at `θ = 0` or `θ = 1` sends a log-moment to `−∞`, which makes `K`
//! and `M` infinite. That is detected analytically.

mod quadrature;

use std::f64::consts::LN_2;
use std::fmt;

use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;
use thiserror::Error;

pub use quadrature::{integrate, QuadratureError};

use crate::measures::{Source, UncertaintyTriple, View};
use crate::nats::Nats;
use crate::sum::compensated_sum;

/// Absolute tolerance for every integral in this module.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
/// Rounding slack allowed before a difference that is non-negative in exact
/// arithmetic is treated as a numerical failure.
const NEGATIVE_SLACK: f64 = 1e-10;
const BISECTION_ITERATIONS: usize = 200;
/// Targets this close outside a bracket still count as reachable; quadrature
/// noise at the bracket ends is far smaller.
const BRACKET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid posterior: {0}")]
    InvalidPosterior(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("{quantity} evaluated to {value:e}, below zero beyond rounding")]
    NegativeResidual { quantity: &'static str, value: f64 },
    #[error("target aleatoric uncertainty {target} nats is outside the reachable range of the {family} family")]
    Infeasible { family: Family, target: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Uniform,
    Beta,
    DeltaMixture,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Uniform => "uniform",
            Family::Beta => "beta",
            Family::DeltaMixture => "delta-mixture",
        })
    }
}

/// One point mass of a [`Posterior1D`] delta mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub theta: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
    DeltaMixture(Vec<Atom>),
}

/// A posterior over a Bernoulli parameter `θ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior1D {
    shape: Shape,
}

impl Posterior1D {
    /// `U[low, high]` with `0 ≤ low < high ≤ 1`.
    pub fn uniform(low: f64, high: f64) -> Result<Self, LabError> {
        if !(0.0 <= low && low < high && high <= 1.0) {
            return Err(LabError::InvalidPosterior(format!(
                "uniform bounds must satisfy 0 <= a < b <= 1, got [{low}, {high}]"
            )));
        }
        Ok(Self {
            shape: Shape::Uniform { low, high },
        })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self, LabError> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(LabError::InvalidPosterior(format!(
                "beta parameters must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self {
            shape: Shape::Beta { alpha, beta },
        })
    }

    /// Mixture of point masses given as `(θ, weight)` pairs. Locations must be
    /// distinct, weights positive and summing to one within `1e-9`.
    pub fn delta_mixture(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, LabError> {
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(theta, weight)| Atom { theta, weight })
            .collect();
        if atoms.is_empty() {
            return Err(LabError::InvalidPosterior("delta mixture has no atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&a.theta) {
                return Err(LabError::InvalidPosterior(format!(
                    "atom location {} outside [0, 1]",
                    a.theta
                )));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(LabError::InvalidPosterior(format!(
                    "atom weight {} is not positive",
                    a.weight
                )));
            }
            if atoms[..i].iter().any(|b| b.theta == a.theta) {
                return Err(LabError::InvalidPosterior(format!(
                    "duplicate atom location {}",
                    a.theta
                )));
            }
        }
        let total = compensated_sum(atoms.iter().map(|a| a.weight));
        if (total - 1.0).abs() > 1e-9 {
            return Err(LabError::InvalidPosterior(format!(
                "atom weights sum to {total}"
            )));
        }
        Ok(Self {
            shape: Shape::DeltaMixture(atoms),
        })
    }

    /// Point mass at `theta`.
    pub fn delta(theta: f64) -> Result<Self, LabError> {
        Self::delta_mixture([(theta, 1.0)])
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn family(&self) -> Family {
        match self.shape {
            Shape::Uniform { .. } => Family::Uniform,
            Shape::Beta { .. } => Family::Beta,
            Shape::DeltaMixture(_) => Family::DeltaMixture,
        }
    }

    /// The posterior of `1 − θ`.
    pub fn reflect(&self) -> Posterior1D {
        let shape = match &self.shape {
            Shape::Uniform { low, high } => Shape::Uniform {
                low: 1.0 - high,
                high: 1.0 - low,
            },
            Shape::Beta { alpha, beta } => Shape::Beta {
                alpha: *beta,
                beta: *alpha,
            },
            Shape::DeltaMixture(atoms) => Shape::DeltaMixture(
                atoms
                    .iter()
                    .map(|a| Atom {
                        theta: 1.0 - a.theta,
                        weight: a.weight,
                    })
                    .collect(),
            ),
        };
        Posterior1D { shape }
    }

    /// Short label such as `U[0.3,0.7]` or `Beta(5,5)`.
    pub fn label(&self) -> String {
        match &self.shape {
            Shape::Uniform { low, high } => format!("U[{low},{high}]"),
            Shape::Beta { alpha, beta } => format!("Beta({alpha},{beta})"),
            Shape::DeltaMixture(atoms) => atoms
                .iter()
                .map(|a| format!("{}*d({})", a.weight, a.theta))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

impl fmt::Display for Posterior1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `x ln x` with `0 ln 0 = 0`.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Entropy of `Bern(θ)` given both `θ` and `1 − θ`, so callers can keep full
/// precision on whichever side is small.
fn binary_entropy(theta: f64, one_minus: f64) -> f64 {
    -(xlogx(theta) + xlogx(one_minus))
}

/// `E[θ]` under the posterior.
pub fn expected_theta(post: &Posterior1D) -> f64 {
    match &post.shape {
        Shape::Uniform { low, high } => 0.5 * (low + high),
        Shape::Beta { alpha, beta } => alpha / (alpha + beta),
        Shape::DeltaMixture(atoms) => compensated_sum(atoms.iter().map(|a| a.weight * a.theta)),
    }
}

/// `E[1 − θ]`, evaluated without forming `1 − E[θ]`.
fn expected_complement(post: &Posterior1D) -> f64 {
    match &post.shape {
        Shape::Uniform { low, high } => 0.5 * ((1.0 - low) + (1.0 - high)),
        Shape::Beta { alpha, beta } => beta / (alpha + beta),
        Shape::DeltaMixture(atoms) => {
            compensated_sum(atoms.iter().map(|a| a.weight * (1.0 - a.theta)))
        }
    }
}

/// `E[ln U]` for `U ~ U[a, b]`.
fn uniform_log_moment(a: f64, b: f64) -> f64 {
    (xlogx(b) - xlogx(a)) / (b - a) - 1.0
}

/// Closed-form `(E[ln θ], E[ln(1 − θ)])`, each in `[−∞, 0]`.
pub fn expected_log_moments(post: &Posterior1D) -> (f64, f64) {
    match &post.shape {
        Shape::Uniform { low, high } => (
            uniform_log_moment(*low, *high),
            uniform_log_moment(1.0 - high, 1.0 - low),
        ),
        Shape::Beta { alpha, beta } => {
            let total = digamma(alpha + beta);
            (digamma(*alpha) - total, digamma(*beta) - total)
        }
        Shape::DeltaMixture(atoms) => {
            let moment = |f: &dyn Fn(&Atom) -> f64| {
                if atoms.iter().any(|a| f(a) == 0.0) {
                    f64::NEG_INFINITY
                } else {
                    compensated_sum(atoms.iter().map(|a| a.weight * f(a).ln()))
                }
            };
            (moment(&|a| a.theta), moment(&|a| 1.0 - a.theta))
        }
    }
}

/// `E[g(θ, 1 − θ)]` for a continuous posterior by adaptive quadrature.
///
/// Beta densities with a parameter below one are singular at that endpoint;
/// on the half next to it the integral is taken in `u = θ^α` (resp.
/// `v = (1 − θ)^β`), which absorbs the singular factor into `du`.
fn posterior_expectation<G>(post: &Posterior1D, g: G) -> Result<f64, LabError>
where
    G: Fn(f64, f64) -> f64,
{
    let tol = QUADRATURE_TOLERANCE;
    match &post.shape {
        Shape::Uniform { low, high } => {
            let width = high - low;
            let v = integrate(|t| g(t, 1.0 - t), *low, *high, tol * width)?;
            Ok(v / width)
        }
        Shape::Beta { alpha, beta } => {
            let (a, b) = (*alpha, *beta);
            let ln_norm = ln_beta(a, b);
            let density = |t: f64, s: f64| ((a - 1.0) * t.ln() + (b - 1.0) * s.ln() - ln_norm).exp();
            let left = if a < 1.0 {
                integrate(
                    |u: f64| {
                        let t = u.powf(1.0 / a);
                        let s = 1.0 - t;
                        g(t, s) * ((b - 1.0) * s.ln() - ln_norm).exp() / a
                    },
                    0.0,
                    0.5f64.powf(a),
                    tol / 2.0,
                )?
            } else {
                integrate(|t| g(t, 1.0 - t) * density(t, 1.0 - t), 0.0, 0.5, tol / 2.0)?
            };
            let right = if b < 1.0 {
                integrate(
                    |v: f64| {
                        let s = v.powf(1.0 / b);
                        let t = 1.0 - s;
                        g(t, s) * ((a - 1.0) * t.ln() - ln_norm).exp() / b
                    },
                    0.0,
                    0.5f64.powf(b),
                    tol / 2.0,
                )?
            } else {
                integrate(|t| g(t, 1.0 - t) * density(t, 1.0 - t), 0.5, 1.0, tol / 2.0)?
            };
            Ok(left + right)
        }
        Shape::DeltaMixture(atoms) => Ok(compensated_sum(
            atoms.iter().map(|a| a.weight * g(a.theta, 1.0 - a.theta)),
        )),
    }
}

/// Log-moments by direct integration, as a check on [`expected_log_moments`].
/// Point-mass posteriors are summed exactly.
pub fn expected_log_moments_by_quadrature(post: &Posterior1D) -> Result<(f64, f64), LabError> {
    if let Shape::DeltaMixture(_) = post.shape {
        return Ok(expected_log_moments(post));
    }
    Ok((
        posterior_expectation(post, |t, _| t.ln())?,
        posterior_expectation(post, |_, s| s.ln())?,
    ))
}

/// Aleatoric uncertainty `E[H(Bern(θ))]`, at most `ln 2`.
pub fn aleatoric(post: &Posterior1D) -> Result<Nats, LabError> {
    let v = posterior_expectation(post, binary_entropy)?;
    Ok(Nats::from_rounded(v.min(LN_2)))
}

fn non_negative(quantity: &'static str, value: f64) -> Result<Nats, LabError> {
    if value < -NEGATIVE_SLACK {
        return Err(LabError::NegativeResidual { quantity, value });
    }
    Ok(Nats::from_rounded(value))
}

/// `−E[θ]·E[ln θ] − E[1 − θ]·E[ln(1 − θ)]` with `0·(−∞) = 0`; `None` when it
/// diverges.
fn log_moment_cross_term(post: &Posterior1D) -> Option<f64> {
    let (ln_t, ln_s) = expected_log_moments(post);
    let mut acc = 0.0;
    for (mass, moment) in [(expected_theta(post), ln_t), (expected_complement(post), ln_s)] {
        if mass == 0.0 {
            continue;
        }
        if moment == f64::NEG_INFINITY {
            return None;
        }
        acc -= mass * moment;
    }
    Some(acc)
}

fn bma_entropy(post: &Posterior1D) -> f64 {
    binary_entropy(expected_theta(post), expected_complement(post))
}

fn mi_triple(post: &Posterior1D, au: Nats) -> Result<UncertaintyTriple, LabError> {
    let eu = non_negative("mutual information", bma_entropy(post) - au.value())?;
    Ok(UncertaintyTriple::new(au, eu, Source::Ensemble(View::MiBased)))
}

fn epkl_triple(post: &Posterior1D, au: Nats) -> Result<UncertaintyTriple, LabError> {
    let eu = match log_moment_cross_term(post) {
        Some(cross) => non_negative("expected pairwise KL", cross - au.value())?,
        None => Nats::INFINITY,
    };
    Ok(UncertaintyTriple::new(au, eu, Source::Ensemble(View::EpklBased)))
}

/// Decomposition with the entropy of the BMA `Bern(E[θ])` as total.
pub fn mi_decomposition(post: &Posterior1D) -> Result<UncertaintyTriple, LabError> {
    mi_triple(post, aleatoric(post)?)
}

/// Decomposition with the expected pairwise KL as epistemic term.
pub fn epkl_decomposition(post: &Posterior1D) -> Result<UncertaintyTriple, LabError> {
    epkl_triple(post, aleatoric(post)?)
}

/// Reverse mutual information `E[KL(Bern(E[θ]) ‖ Bern(θ))]`.
pub fn rmi(post: &Posterior1D) -> Result<Nats, LabError> {
    match log_moment_cross_term(post) {
        Some(cross) => non_negative("reverse mutual information", cross - bma_entropy(post)),
        None => Ok(Nats::INFINITY),
    }
}

/// All measures for one posterior. Both triples hold the same aleatoric value.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliReport {
    pub posterior: Posterior1D,
    pub expected_theta: f64,
    pub mi: UncertaintyTriple,
    pub epkl: UncertaintyTriple,
    pub rmi: Nats,
}

impl BernoulliReport {
    pub fn compute(post: &Posterior1D) -> Result<Self, LabError> {
        let au = aleatoric(post)?;
        Ok(Self {
            posterior: post.clone(),
            expected_theta: expected_theta(post),
            mi: mi_triple(post, au)?,
            epkl: epkl_triple(post, au)?,
            rmi: rmi(post)?,
        })
    }
}

/// The six reference posteriors, in display order: `U[0,1]`, `Beta(5,5)`,
/// `Beta(0.4,0.4)`, `U[0.3,0.7]`, `U[0.5,0.9]`, `½δ₀ + ½δ₁`.
pub fn reference_posteriors() -> Vec<Posterior1D> {
    vec![
        Posterior1D::uniform(0.0, 1.0).unwrap(),
        Posterior1D::beta(5.0, 5.0).unwrap(),
        Posterior1D::beta(0.4, 0.4).unwrap(),
        Posterior1D::uniform(0.3, 0.7).unwrap(),
        Posterior1D::uniform(0.5, 0.9).unwrap(),
        Posterior1D::delta_mixture([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
    ]
}

/// Reports for [`reference_posteriors`].
pub fn reference_table() -> Result<Vec<BernoulliReport>, LabError> {
    reference_posteriors()
        .iter()
        .map(BernoulliReport::compute)
        .collect()
}

/// Three posteriors from different families with the same mean and the same
/// aleatoric uncertainty, hence identical mutual-information decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedDegenerates {
    /// Shared `E[θ]`.
    pub mean: f64,
    pub uniform: Posterior1D,
    pub beta: Posterior1D,
    pub delta_mixture: Posterior1D,
}

impl MatchedDegenerates {
    pub fn posteriors(&self) -> [&Posterior1D; 3] {
        [&self.uniform, &self.beta, &self.delta_mixture]
    }
}

/// Bisection for `f(x) = target` on `[lo, hi]` with `f` monotone.
fn bisect<F>(f: F, mut lo: f64, mut hi: f64, target: f64, family: Family) -> Result<f64, LabError>
where
    F: Fn(f64) -> Result<f64, LabError>,
{
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    let increasing = f_hi > f_lo;
    let (min, max) = if increasing { (f_lo, f_hi) } else { (f_hi, f_lo) };
    if !(min - BRACKET_SLACK..=max + BRACKET_SLACK).contains(&target) {
        return Err(LabError::Infeasible { family, target });
    }
    let mut best = if (f_lo - target).abs() < (f_hi - target).abs() { lo } else { hi };
    let mut best_gap = (f(best)? - target).abs();
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        let gap = (v - target).abs();
        if gap < best_gap {
            best = mid;
            best_gap = gap;
        }
        if gap <= 1e-14 {
            break;
        }
        if (v < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

fn centered_uniform(mean: f64, half_width: f64) -> Result<Posterior1D, LabError> {
    Posterior1D::uniform(mean - half_width, mean + half_width)
}

/// `Beta(m κ, (1 − m) κ)`.
fn beta_with_mean(mean: f64, concentration: f64) -> Result<Posterior1D, LabError> {
    Posterior1D::beta(mean * concentration, (1.0 - mean) * concentration)
}

/// Two atoms `m(1 − t)` and `m + (1 − m) t` weighted `1 − m` and `m`, whose
/// mean is `m`. For `m = ½` this is `½δ_{½−t/2} + ½δ_{½+t/2}`.
fn spread_atoms(mean: f64, spread: f64) -> Result<Posterior1D, LabError> {
    Posterior1D::delta_mixture([
        (mean * (1.0 - spread), 1.0 - mean),
        (mean + (1.0 - mean) * spread, mean),
    ])
}

fn au_value(post: Result<Posterior1D, LabError>) -> Result<f64, LabError> {
    Ok(aleatoric(&post?)?.value())
}

/// Width `b` maximizing the aleatoric uncertainty of `U[0, b]`, where
/// `H(b)` equals the running average `E[H]` under `U[0, b]`.
fn widest_anchored_uniform() -> Result<f64, LabError> {
    bisect(
        |b| Ok(binary_entropy(b, 1.0 - b) - aleatoric(&Posterior1D::uniform(0.0, b)?)?.value()),
        0.5,
        1.0 - 1e-9,
        0.0,
        Family::Uniform,
    )
}

/// Finds a uniform, a beta and a two-atom posterior sharing `E[θ]` and
/// aleatoric uncertainty `target_au`.
///
/// When an anchored uniform `U[0, b]` can reach the target (up to the largest
/// `E[H]` over `b`, about 0.55 nat) the triple is built around it and shares
/// its mean `b/2`. Above that, the uniform is centred, `U[½ − c, ½ + c]`, and
/// the shared mean is `½`. Anchoring at zero keeps the uniform from ever
/// coinciding with the beta member (`U[0, 1]` is `Beta(1, 1)`).
///
/// The beta member is `Beta(m κ, (1 − m) κ)` with `κ ∈ [2e-3, 2e4]` searched on
/// a log scale; the mixture is `(1 − m) δ_{m(1−t)} + m δ_{m + (1−m)t}`.
pub fn construct_matched_degenerates(target_au: f64) -> Result<MatchedDegenerates, LabError> {
    if !(target_au > 0.0 && target_au < LN_2) {
        return Err(LabError::InvalidPosterior(format!(
            "target aleatoric uncertainty must lie in (0, ln 2), got {target_au}"
        )));
    }
    let b_max = widest_anchored_uniform()?;
    let anchored_max = aleatoric(&Posterior1D::uniform(0.0, b_max)?)?.value();
    let (mean, uniform) = if target_au <= anchored_max {
        let b = bisect(
            |b| au_value(Posterior1D::uniform(0.0, b)),
            1e-9,
            b_max,
            target_au,
            Family::Uniform,
        )?;
        (0.5 * b, Posterior1D::uniform(0.0, b)?)
    } else {
        let c = bisect(
            |c| au_value(centered_uniform(0.5, c)),
            1e-10,
            0.5,
            target_au,
            Family::Uniform,
        )?;
        (0.5, centered_uniform(0.5, c)?)
    };
    let log_kappa = bisect(
        |lk| au_value(beta_with_mean(mean, lk.exp())),
        2e-3f64.ln(),
        2e4f64.ln(),
        target_au,
        Family::Beta,
    )?;
    let t = bisect(
        |t| au_value(spread_atoms(mean, t)),
        1e-12,
        1.0 - 1e-12,
        target_au,
        Family::DeltaMixture,
    )?;
    Ok(MatchedDegenerates {
        mean,
        uniform,
        beta: beta_with_mean(mean, log_kappa.exp())?,
        delta_mixture: spread_atoms(mean, t)?,
    })
}
