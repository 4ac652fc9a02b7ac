//! Arc weights: nonnegative integer milliseconds or the distinguished
//! value `Infinite`.
//!
//! `Infinite` is a real sentinel, not a large number, so that closed road
//! segments (`upper = Infinite`) are representable exactly. It is
//! absorbing under addition and compares greater than every finite value
//! (the derived `Ord` gives exactly that).

use core::fmt;
use core::ops::Add;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Weight {
    Finite(u64),
    Infinite,
}

impl Weight {
    pub const ZERO: Weight = Weight::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Weight::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Weight::Finite(v) => Some(v),
            Weight::Infinite => None,
        }
    }

    /// Finite value, panicking on `Infinite`. For contexts whose invariants
    /// guarantee finiteness.
    pub fn expect_finite(self, what: &str) -> u64 {
        match self {
            Weight::Finite(v) => v,
            Weight::Infinite => panic!("expected finite weight: {what}"),
        }
    }

    /// `self * factor`, absorbing on `Infinite`, panicking on u64 overflow.
    pub fn scale(self, factor: u64) -> Weight {
        match self {
            Weight::Finite(v) => {
                Weight::Finite(v.checked_mul(factor).expect("weight overflow"))
            }
            Weight::Infinite => Weight::Infinite,
        }
    }

    /// `ceil(self * num / den)` in exact integer arithmetic.
    pub fn scale_ratio_ceil(self, num: u64, den: u64) -> Weight {
        assert!(den > 0, "zero denominator");
        match self {
            Weight::Finite(v) => {
                let prod = (v as u128) * (num as u128);
                let up = prod.div_ceil(den as u128);
                Weight::Finite(u64::try_from(up).expect("weight overflow"))
            }
            Weight::Infinite => Weight::Infinite,
        }
    }

    /// Difference `self - other` for `other` finite; `Infinite - finite`
    /// stays `Infinite`.
    pub fn saturating_sub_finite(self, other: u64) -> Weight {
        match self {
            Weight::Finite(v) => Weight::Finite(v.saturating_sub(other)),
            Weight::Infinite => Weight::Infinite,
        }
    }
}

impl Add for Weight {
    type Output = Weight;

    fn add(self, rhs: Weight) -> Weight {
        match (self, rhs) {
            (Weight::Finite(a), Weight::Finite(b)) => {
                Weight::Finite(a.checked_add(b).expect("weight overflow"))
            }
            _ => Weight::Infinite,
        }
    }
}

impl core::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, Add::add)
    }
}

impl From<u64> for Weight {
    fn from(v: u64) -> Weight {
        Weight::Finite(v)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(v) => write!(f, "{v}"),
            Weight::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_is_absorbing_and_maximal() {
        assert_eq!(Weight::Infinite + Weight::Finite(7), Weight::Infinite);
        assert_eq!(Weight::Finite(7) + Weight::Infinite, Weight::Infinite);
        assert!(Weight::Finite(u64::MAX) < Weight::Infinite);
        assert_eq!(Weight::Finite(3) + Weight::Finite(4), Weight::Finite(7));
    }

    #[test]
    fn ratio_ceil_rounds_up() {
        assert_eq!(Weight::Finite(10).scale_ratio_ceil(11, 10), Weight::Finite(11));
        assert_eq!(Weight::Finite(11).scale_ratio_ceil(11, 10), Weight::Finite(13));
        assert_eq!(Weight::Infinite.scale_ratio_ceil(11, 10), Weight::Infinite);
    }
}
