//! Seeded toy classification data scored by a perturbed linear ensemble.
//!
//! Class `c` of `K` has its centre at radius 2 on the unit circle angle
//! `2πc/K`. Inputs are the class centre plus standard normal noise, moved by
//! `shift` along `(1, 1)/√2`. Member `s` scores input `x` with
//! `softmax(W_s x + b_s)`, where the base scorer has `W₀[c] = μ_c` and
//! `b₀[c] = −|μ_c|²/2` and every member adds independent
//! `disagreement · N(0, 1)` noise to each entry of `W₀` and `b₀`.
//!
//! Member weights come from a generator keyed with `model_seed`; labels and
//! inputs from one keyed with `seed`. Batches that differ only in `seed` and
//! `shift` are therefore scored by the same ensemble. Draw order: for each member and class,
//! two weight entries then the bias; for each input, the label, then two
//! noise coordinates.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::estimator::{EnsembleBatch, EstimatorError};
use crate::rng::SeededRng;

const RADIUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Seed for the ensemble members.
    pub model_seed: u64,
    pub inputs: usize,
    pub members: usize,
    pub classes: usize,
    pub disagreement: f64,
    pub shift: f64,
    /// Prepended to each input index to form identifiers.
    pub id_prefix: String,
}

impl SyntheticConfig {
    pub fn new(seed: u64, inputs: usize, members: usize, classes: usize) -> Self {
        Self {
            seed,
            model_seed: 0,
            inputs,
            members,
            classes,
            disagreement: 0.5,
            shift: 0.0,
            id_prefix: String::new(),
        }
    }
}

fn centre(c: usize, k: usize) -> [f64; 2] {
    let a = TAU * c as f64 / k as f64;
    [RADIUS * a.cos(), RADIUS * a.sin()]
}

/// Returns the batch and each input's true class.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<(EnsembleBatch, Vec<usize>), EstimatorError> {
    let (n, s, k) = (cfg.inputs, cfg.members, cfg.classes);
    if !(cfg.disagreement >= 0.0 && cfg.disagreement.is_finite())
        || !(cfg.shift >= 0.0 && cfg.shift.is_finite())
    {
        return Err(EstimatorError::Shape(format!(
            "disagreement {} and shift {} must be finite and non-negative",
            cfg.disagreement, cfg.shift
        )));
    }
    if n == 0 || s == 0 || k < 2 {
        return Err(EstimatorError::Shape(format!(
            "need N >= 1, S >= 1, K >= 2; got N = {n}, S = {s}, K = {k}"
        )));
    }
    let centres: Vec<[f64; 2]> = (0..k).map(|c| centre(c, k)).collect();

    let mut model_rng = SeededRng::new(cfg.model_seed);
    // Per member, per class: (w_x, w_y, b).
    let models: Vec<Vec<[f64; 3]>> = (0..s)
        .map(|_| {
            centres
                .iter()
                .map(|mu| {
                    let b0 = -(mu[0] * mu[0] + mu[1] * mu[1]) / 2.0;
                    let wx = mu[0] + cfg.disagreement * model_rng.normal();
                    let wy = mu[1] + cfg.disagreement * model_rng.normal();
                    let b = b0 + cfg.disagreement * model_rng.normal();
                    [wx, wy, b]
                })
                .collect()
        })
        .collect();

    let mut rng = SeededRng::new(cfg.seed);
    let offset = cfg.shift * FRAC_1_SQRT_2;
    let mut labels = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n * s * k);
    let mut logits = vec![0.0; k];
    for _ in 0..n {
        let label = rng.below(k);
        let x = centres[label][0] + rng.normal() + offset;
        let y = centres[label][1] + rng.normal() + offset;
        labels.push(label);
        for member in &models {
            for (z, m) in logits.iter_mut().zip(member) {
                *z = m[0] * x + m[1] * y + m[2];
            }
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let start = probs.len();
            probs.extend(logits.iter().map(|z| (z - max).exp()));
            let total: f64 = probs[start..].iter().sum();
            probs[start..].iter_mut().for_each(|p| *p /= total);
        }
    }
    let ids = (0..n).map(|i| format!("{}{i}", cfg.id_prefix)).collect();
    let batch = EnsembleBatch::new(n, s, k, probs, None, Some(ids))?;
    Ok((batch, labels))
}
