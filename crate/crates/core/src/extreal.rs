//! Extended real numbers with explicit infinities.
//!
//! Arithmetic follows the conventions of measure theory: `0 · (±∞) = 0`,
//! `x / (±∞) = 0` for finite `x`, and `+∞ + (−∞)` is indeterminate.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "value", rename_all = "snake_case")]
pub enum ExtReal {
    Finite(f64),
    NegInf,
    PosInf,
    Indeterminate,
}

pub use ExtReal::{Finite, Indeterminate, NegInf, PosInf};

impl ExtReal {
    pub const ZERO: ExtReal = Finite(0.0);

    /// Maps IEEE infinities to the tagged infinities and NaN to `Indeterminate`.
    pub fn from_f64(x: f64) -> ExtReal {
        if x.is_nan() {
            Indeterminate
        } else if x == f64::INFINITY {
            PosInf
        } else if x == f64::NEG_INFINITY {
            NegInf
        } else {
            Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Lossy projection onto `f64`, used for plotting and tables.
    pub fn to_f64(self) -> f64 {
        match self {
            Finite(x) => x,
            NegInf => f64::NEG_INFINITY,
            PosInf => f64::INFINITY,
            Indeterminate => f64::NAN,
        }
    }

    /// Panics unless finite. Use where the caller has already excluded poles.
    pub fn expect_finite(self, what: &str) -> f64 {
        match self {
            Finite(x) => x,
            other => panic!("{what}: expected a finite value, got {other}"),
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, x) | (x, NegInf) => x,
            (Finite(a), Finite(b)) => Finite(a.max(b)),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        -((-self).max(-other))
    }

    pub fn scale(self, a: f64) -> ExtReal {
        self * a
    }

    pub fn positive_part(self) -> ExtReal {
        self.max(ExtReal::ZERO)
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(x) => write!(f, "{x}"),
            NegInf => write!(f, "-inf"),
            PosInf => write!(f, "+inf"),
            Indeterminate => write!(f, "indeterminate"),
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            Finite(x) => Finite(-x),
            NegInf => PosInf,
            PosInf => NegInf,
            Indeterminate => Indeterminate,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            (PosInf, NegInf) | (NegInf, PosInf) => Indeterminate,
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Finite(a), Finite(b)) => ExtReal::from_f64(a + b),
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::from_f64(rhs)
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl Sub<f64> for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: f64) -> ExtReal {
        self + (-rhs)
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, a: f64) -> ExtReal {
        if a.is_nan() {
            return Indeterminate;
        }
        match self {
            Finite(x) => ExtReal::from_f64(x * a),
            Indeterminate => Indeterminate,
            _ if a == 0.0 => Finite(0.0),
            PosInf => {
                if a > 0.0 {
                    PosInf
                } else {
                    NegInf
                }
            }
            NegInf => {
                if a > 0.0 {
                    NegInf
                } else {
                    PosInf
                }
            }
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            (Finite(a), x) | (x, Finite(a)) => x * a,
            (PosInf, PosInf) | (NegInf, NegInf) => PosInf,
            _ => NegInf,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        fn rank(x: &ExtReal) -> Option<(i8, f64)> {
            match *x {
                NegInf => Some((-1, 0.0)),
                Finite(v) => Some((0, v)),
                PosInf => Some((1, 0.0)),
                Indeterminate => None,
            }
        }
        let (a, b) = (rank(self)?, rank(other)?);
        match a.0.cmp(&b.0) {
            Ordering::Equal => a.1.partial_cmp(&b.1),
            o => Some(o),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        *self == ExtReal::from_f64(*other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&ExtReal::from_f64(*other))
    }
}

/// Sums extended reals, returning `Indeterminate` on `+∞ − ∞`.
pub fn ext_sum<I: IntoIterator<Item = ExtReal>>(items: I) -> ExtReal {
    let mut acc = 0.0f64;
    let (mut pos, mut neg) = (false, false);
    for x in items {
        match x {
            Finite(v) => acc += v,
            PosInf => pos = true,
            NegInf => neg = true,
            Indeterminate => return Indeterminate,
        }
    }
    match (pos, neg) {
        (true, true) => Indeterminate,
        (true, false) => PosInf,
        (false, true) => NegInf,
        (false, false) => ExtReal::from_f64(acc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(NegInf * 0.0, Finite(0.0));
        assert_eq!(PosInf * Finite(0.0), Finite(0.0));
    }

    #[test]
    fn opposite_infinities_are_indeterminate() {
        assert_eq!(PosInf + NegInf, Indeterminate);
        assert_eq!(ext_sum([Finite(1.0), NegInf, PosInf]), Indeterminate);
    }

    #[test]
    fn ordering_places_infinities_at_the_ends() {
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(1e300) < PosInf);
        assert!(Indeterminate.partial_cmp(&Finite(0.0)).is_none());
    }

    #[test]
    fn max_absorbs_negative_infinity() {
        assert_eq!(NegInf.max(Finite(-3.0)), Finite(-3.0));
        assert_eq!(NegInf.min(Finite(-3.0)), NegInf);
    }
}
