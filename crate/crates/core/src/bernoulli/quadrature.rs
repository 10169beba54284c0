//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with a 15-point Gauss–Legendre rule and with the
//! same rule on its two halves; the difference is the panel's error estimate.
//! The panel with the largest estimate is bisected until the summed estimate
//! drops below the requested absolute tolerance. Working on the global error
//! sum (rather than recursing with halved tolerances) lets integrable
//! logarithmic endpoint singularities converge.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use thiserror::Error;

const ORDER: usize = 15;
const MAX_PANELS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
pub struct QuadratureError {
    pub achieved: f64,
    pub requested: f64,
}

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
fn rule() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut out = [(0.0, 0.0); ORDER];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Self {
        let m = 0.5 * (a + b);
        let whole = gauss(f, a, b);
        let value = gauss(f, a, m) + gauss(f, m, b);
        Self {
            a,
            b,
            value,
            error: (whole - value).abs(),
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `∫ₐᵇ f` to absolute tolerance `tol`. `f` is only sampled strictly inside
/// `(a, b)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = Panel::new(&f, a, b);
    let mut error = first.error;
    heap.push(first);
    // Negated so that a NaN error estimate keeps refining and then fails.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    while !(error <= tol) {
        if heap.len() >= MAX_PANELS || !error.is_finite() {
            return Err(QuadratureError {
                achieved: error,
                requested: tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Panel has collapsed to adjacent floats; nothing left to refine.
            return Err(QuadratureError {
                achieved: error,
                requested: tol,
            });
        }
        let left = Panel::new(&f, worst.a, m);
        let right = Panel::new(&f, m, worst.b);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so cancellation in the running total cannot
        // mask real error.
        if heap.len() % 64 == 0 {
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = crate::sum::compensated_sum(panels.iter().map(|p| p.value));
    if !value.is_finite() {
        return Err(QuadratureError {
            achieved: f64::INFINITY,
            requested: tol,
        });
    }
    Ok(value)
}
