//! Non-negative information quantities that may diverge.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

/// An amount of information in nats: a non-negative real or `+∞`.
///
/// Divergences between categorical distributions with mismatched support are
/// genuinely infinite, so `+∞` is an ordinary value here rather than an error.
/// The type never holds a negative number or NaN, which makes it totally
/// ordered.
///
/// ```
/// use uncq::Nats;
///
/// let a = Nats::new(0.25).unwrap();
/// assert_eq!((a + Nats::INFINITY), Nats::INFINITY);
/// assert!(Nats::INFINITY > Nats::new(1e300).unwrap());
/// ```
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Nats(f64);

impl Nats {
    pub const ZERO: Nats = Nats(0.0);
    pub const INFINITY: Nats = Nats(f64::INFINITY);

    /// Returns `None` for negative values and NaN.
    pub fn new(value: f64) -> Option<Nats> {
        if value >= 0.0 {
            Some(Nats(value))
        } else {
            None
        }
    }

    /// Builds a quantity from a floating-point result that is non-negative in
    /// exact arithmetic. Rounding residue below zero is mapped to `0`.
    ///
    /// # Panics
    ///
    /// Panics on NaN, which would indicate a bug upstream.
    pub(crate) fn from_rounded(value: f64) -> Nats {
        assert!(!value.is_nan(), "information quantity evaluated to NaN");
        Nats(value.max(0.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Converts to bits (divides by `ln 2`). `∞` stays `∞`.
    pub fn to_bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    /// Scales by a non-negative weight with the measure-theoretic convention
    /// `0 · ∞ = 0`.
    pub fn scale(self, weight: f64) -> Nats {
        debug_assert!(weight >= 0.0);
        if weight == 0.0 {
            Nats::ZERO
        } else {
            Nats(self.0 * weight)
        }
    }
}

impl Add for Nats {
    type Output = Nats;

    fn add(self, rhs: Nats) -> Nats {
        Nats(self.0 + rhs.0)
    }
}

impl Sum for Nats {
    fn sum<I: Iterator<Item = Nats>>(iter: I) -> Nats {
        iter.fold(Nats::ZERO, Add::add)
    }
}

impl Eq for Nats {}

impl PartialOrd for Nats {
    fn partial_cmp(&self, other: &Nats) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Nats {
    fn cmp(&self, other: &Nats) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<Nats> for f64 {
    fn from(n: Nats) -> f64 {
        n.0
    }
}

impl fmt::Debug for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            fmt::Debug::fmt(&self.0, f)
        }
    }
}

impl fmt::Display for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}
