use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{BigReal, ExactScalar};

/// Open interval `(lo, hi)` with exact endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: ExactScalar,
    pub hi: ExactScalar,
}

/// Half-open interval `[lo, hi)` with exact endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfOpenInterval {
    pub lo: ExactScalar,
    pub hi: ExactScalar,
}

fn parse_pair(s: &str) -> Result<(ExactScalar, ExactScalar)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("interval must be \"lo,hi\", got {s:?}")))?;
    Ok((a.parse()?, b.parse()?))
}

impl OpenInterval {
    pub fn new(lo: ExactScalar, hi: ExactScalar) -> Result<Self> {
        if lo.value() >= hi.value() {
            return Err(Error::Precondition(format!("interval ({lo}, {hi}) is empty")));
        }
        Ok(OpenInterval { lo, hi })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.lo.clone(), self.hi.clone()).map(|_| ())
    }

    pub fn length(&self) -> Rational {
        Rational::from(self.hi.value() - self.lo.value())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.value() < x && x < self.hi.value()
    }

    /// Closure contains `x`.
    pub fn closure_contains(&self, x: &Rational) -> bool {
        self.lo.value() <= x && x <= self.hi.value()
    }

    /// The integers `m` with `m/n` in the interval, as an inclusive range
    /// `(first, last)`; empty when `first > last`.
    pub fn scaled_integer_range(&self, n: u64) -> (Integer, Integer) {
        let lo = Rational::from(self.lo.value() * n);
        let hi = Rational::from(self.hi.value() * n);
        let first = lo.floor().into_numer_denom().0 + 1u32;
        let last = hi.ceil().into_numer_denom().0 - 1u32;
        (first, last)
    }

    /// `m` with `lo < m/n < hi`, as machine integers.
    pub fn scaled_integers(&self, n: u64) -> Result<std::ops::RangeInclusive<i64>> {
        let (first, last) = self.scaled_integer_range(n);
        let f = first.to_i64().ok_or_else(|| Error::Domain("range exceeds i64".into()))?;
        let l = last.to_i64().ok_or_else(|| Error::Domain("range exceeds i64".into()))?;
        Ok(f..=l)
    }

    pub fn enclose_lo(&self, bits: u32) -> BigReal {
        self.lo.enclose(bits)
    }

    pub fn enclose_hi(&self, bits: u32) -> BigReal {
        self.hi.enclose(bits)
    }
}

impl HalfOpenInterval {
    pub fn new(lo: ExactScalar, hi: ExactScalar) -> Result<Self> {
        if lo.value() >= hi.value() {
            return Err(Error::Precondition(format!("interval [{lo}, {hi}) is empty")));
        }
        Ok(HalfOpenInterval { lo, hi })
    }

    /// A non-empty subinterval of `[0, 1)`.
    pub fn unit(lo: ExactScalar, hi: ExactScalar) -> Result<Self> {
        let out = Self::new(lo, hi)?;
        out.validate_unit()?;
        Ok(out)
    }

    pub fn full() -> Self {
        HalfOpenInterval { lo: ExactScalar::from_int(0), hi: ExactScalar::from_int(1) }
    }

    pub fn validate_unit(&self) -> Result<()> {
        if self.lo.value() >= self.hi.value() {
            return Err(Error::Precondition(format!("interval [{}, {}) is empty", self.lo, self.hi)));
        }
        if *self.lo.value() < 0 || *self.hi.value() > 1 {
            return Err(Error::Precondition(format!("interval [{}, {}) is not inside [0,1)", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn length(&self) -> Rational {
        Rational::from(self.hi.value() - self.lo.value())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.value() <= x && x < self.hi.value()
    }

    pub fn is_full(&self) -> bool {
        *self.lo.value() == 0 && *self.hi.value() == 1
    }

    /// Certified membership of an enclosed value; `Unresolved` when the
    /// enclosure straddles an endpoint.
    pub fn contains_enclosure(&self, x: &BigReal) -> Result<bool> {
        let (l, r) = (self.lo.value(), self.hi.value());
        if *x.lo() >= *l && *x.hi() < *r {
            Ok(true)
        } else if *x.hi() < *l || *x.lo() >= *r {
            Ok(false)
        } else {
            Err(Error::Unresolved)
        }
    }
}

impl FromStr for OpenInterval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = parse_pair(s)?;
        OpenInterval::new(a, b)
    }
}

impl FromStr for HalfOpenInterval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = parse_pair(s)?;
        HalfOpenInterval::new(a, b)
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

impl fmt::Display for HalfOpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    #[test]
    fn scaled_integer_ranges() {
        let j: OpenInterval = "0.3,0.45".parse().unwrap();
        assert_eq!(j.scaled_integers(10).unwrap(), 4..=4);
        assert!(j.scaled_integers(1).unwrap().is_empty());
        assert_eq!(j.scaled_integers(10_000).unwrap().count(), 1499);
        let u: OpenInterval = "0,1".parse().unwrap();
        assert_eq!(u.scaled_integers(10).unwrap(), 1..=9);
        let neg: OpenInterval = "-1,1".parse().unwrap();
        assert_eq!(neg.scaled_integers(3).unwrap(), -2..=2);
    }

    #[test]
    fn parsing_and_validation() {
        assert!("0.5,0.5".parse::<OpenInterval>().is_err());
        assert!("0.5".parse::<OpenInterval>().is_err());
        assert!("0,0".parse::<HalfOpenInterval>().is_err());
        let bad = HalfOpenInterval::new(ExactScalar::ratio(1, 2), ExactScalar::ratio(3, 2)).unwrap();
        assert!(bad.validate_unit().is_err());
    }

    #[test]
    fn half_open_membership() {
        let i: HalfOpenInterval = "0,1/2".parse().unwrap();
        let at = |x: f64| BigReal::from_endpoints(Float::with_val(64, x), Float::with_val(64, x)).unwrap();
        assert_eq!(i.contains_enclosure(&at(0.0)), Ok(true));
        assert_eq!(i.contains_enclosure(&at(0.5)), Ok(false));
        let wide = BigReal::from_endpoints(Float::with_val(64, 0.49), Float::with_val(64, 0.51)).unwrap();
        assert_eq!(i.contains_enclosure(&wide), Err(Error::Unresolved));
    }
}
