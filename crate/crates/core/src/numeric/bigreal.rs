use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A certified real: the exact value lies in `[lo, hi]`.
///
/// Every operation rounds the lower endpoint down and the upper endpoint up,
/// so results always enclose the exact value of the expression.
#[derive(Clone, Debug, PartialEq)]
pub struct BigReal {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, val: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

fn min_f(a: Float, b: Float) -> Float {
    if b < a { b } else { a }
}

fn max_f(a: Float, b: Float) -> Float {
    if b > a { b } else { a }
}

/// Turns a round-to-nearest result and its ternary value into a tight enclosure.
fn bracket(v: Float, dir: Ordering) -> BigReal {
    match dir {
        Ordering::Equal => BigReal { lo: v.clone(), hi: v },
        Ordering::Greater => {
            let mut lo = v.clone();
            lo.next_down();
            BigReal { lo, hi: v }
        }
        Ordering::Less => {
            let mut hi = v.clone();
            hi.next_up();
            BigReal { lo: v, hi }
        }
    }
}

impl BigReal {
    pub fn from_endpoints(lo: Float, hi: Float) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Domain("invalid enclosure endpoints".into()));
        }
        Ok(BigReal { lo, hi })
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Self {
        BigReal { lo: down(bits, q), hi: up(bits, q) }
    }

    pub fn from_integer(n: &Integer, bits: u32) -> Self {
        BigReal { lo: down(bits, n), hi: up(bits, n) }
    }

    pub fn from_u64(n: u64, bits: u32) -> Self {
        BigReal { lo: down(bits, n), hi: up(bits, n) }
    }

    pub fn from_i64(n: i64, bits: u32) -> Self {
        BigReal { lo: down(bits, n), hi: up(bits, n) }
    }

    pub fn zero(bits: u32) -> Self {
        Self::from_u64(0, bits)
    }

    pub fn pi(bits: u32) -> Self {
        BigReal { lo: down(bits, Constant::Pi), hi: up(bits, Constant::Pi) }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    /// Midpoint of the enclosure.
    pub fn value(&self) -> Float {
        let prec = self.bits() + 1;
        let mut v = Float::with_val(prec, &self.lo + &self.hi);
        v /= 2;
        v
    }

    /// Half-width, rounded up.
    pub fn radius(&self) -> Float {
        let mut r = up(self.bits(), &self.hi - &self.lo);
        r /= 2;
        r
    }

    pub fn width(&self) -> Float {
        up(self.bits(), &self.hi - &self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo <= *q && self.hi >= *q
    }

    pub fn contains_float(&self, x: &Float) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    /// Certified ordering, `None` when the enclosures overlap without being
    /// the same exact point.
    pub fn cmp_certain(&self, other: &BigReal) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        if self.hi < *q {
            Some(Ordering::Less)
        } else if self.lo > *q {
            Some(Ordering::Greater)
        } else if self.is_point() && self.lo == *q {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `self <= other` certified, else `Unresolved` when undecided.
    pub fn le(&self, other: &BigReal) -> Result<bool> {
        if self.hi <= other.lo {
            Ok(true)
        } else if self.lo > other.hi {
            Ok(false)
        } else {
            Err(Error::Unresolved)
        }
    }

    pub fn is_positive(&self) -> Option<bool> {
        if self.lo > 0 {
            Some(true)
        } else if self.hi <= 0 {
            Some(false)
        } else {
            None
        }
    }

    pub fn neg(&self) -> BigReal {
        BigReal { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, o: &BigReal) -> BigReal {
        let p = self.bits().max(o.bits());
        BigReal { lo: down(p, &self.lo + &o.lo), hi: up(p, &self.hi + &o.hi) }
    }

    pub fn sub(&self, o: &BigReal) -> BigReal {
        let p = self.bits().max(o.bits());
        BigReal { lo: down(p, &self.lo - &o.hi), hi: up(p, &self.hi - &o.lo) }
    }

    pub fn add_integer(&self, k: &Integer) -> BigReal {
        let p = self.bits();
        BigReal { lo: down(p, &self.lo + k), hi: up(p, &self.hi + k) }
    }

    pub fn sub_integer(&self, k: &Integer) -> BigReal {
        let p = self.bits();
        BigReal { lo: down(p, &self.lo - k), hi: up(p, &self.hi - k) }
    }

    pub fn mul(&self, o: &BigReal) -> BigReal {
        let p = self.bits().max(o.bits());
        if self.lo >= 0 && o.lo >= 0 {
            return BigReal { lo: down(p, &self.lo * &o.lo), hi: up(p, &self.hi * &o.hi) };
        }
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo = down(p, pairs[0].0 * pairs[0].1);
        let mut hi = up(p, pairs[0].0 * pairs[0].1);
        for (a, b) in &pairs[1..] {
            lo = min_f(lo, down(p, *a * *b));
            hi = max_f(hi, up(p, *a * *b));
        }
        BigReal { lo, hi }
    }

    pub fn mul_u64(&self, k: u64) -> BigReal {
        let p = self.bits();
        BigReal { lo: down(p, &self.lo * k), hi: up(p, &self.hi * k) }
    }

    pub fn div(&self, o: &BigReal) -> Result<BigReal> {
        if o.lo <= 0 && o.hi >= 0 {
            return if o.is_point() {
                Err(Error::Domain("division by zero".into()))
            } else {
                Err(Error::Unresolved)
            };
        }
        let p = self.bits().max(o.bits());
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo = down(p, pairs[0].0 / pairs[0].1);
        let mut hi = up(p, pairs[0].0 / pairs[0].1);
        for (a, b) in &pairs[1..] {
            lo = min_f(lo, down(p, *a / *b));
            hi = max_f(hi, up(p, *a / *b));
        }
        Ok(BigReal { lo, hi })
    }

    pub fn div_u64(&self, k: u64) -> BigReal {
        assert!(k > 0, "division by zero");
        let p = self.bits();
        BigReal { lo: down(p, &self.lo / k), hi: up(p, &self.hi / k) }
    }

    pub fn abs(&self) -> BigReal {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            self.neg()
        } else {
            let m = max_f(-self.lo.clone(), self.hi.clone());
            BigReal { lo: Float::with_val(self.bits(), 0), hi: m }
        }
    }

    pub fn min(&self, o: &BigReal) -> BigReal {
        BigReal { lo: min_f(self.lo.clone(), o.lo.clone()), hi: min_f(self.hi.clone(), o.hi.clone()) }
    }

    pub fn max(&self, o: &BigReal) -> BigReal {
        BigReal { lo: max_f(self.lo.clone(), o.lo.clone()), hi: max_f(self.hi.clone(), o.hi.clone()) }
    }

    /// Convex hull of two enclosures.
    pub fn hull(&self, o: &BigReal) -> BigReal {
        BigReal { lo: min_f(self.lo.clone(), o.lo.clone()), hi: max_f(self.hi.clone(), o.hi.clone()) }
    }

    /// Applies a nondecreasing MPFR function endpoint-wise.
    fn monotone(&self, f: impl Fn(&mut Float, Round) -> Ordering) -> BigReal {
        if self.is_point() {
            let mut v = self.lo.clone();
            let dir = f(&mut v, Round::Nearest);
            return bracket(v, dir);
        }
        let mut lo = self.lo.clone();
        f(&mut lo, Round::Down);
        let mut hi = self.hi.clone();
        f(&mut hi, Round::Up);
        BigReal { lo, hi }
    }

    pub fn ln(&self) -> Result<BigReal> {
        match self.is_positive() {
            Some(true) => Ok(self.monotone(|x, r| x.ln_round(r))),
            Some(false) => Err(Error::Domain("logarithm of a non-positive number".into())),
            None => Err(Error::Unresolved),
        }
    }

    pub fn exp(&self) -> BigReal {
        self.monotone(|x, r| x.exp_round(r))
    }

    pub fn sqrt(&self) -> Result<BigReal> {
        if self.hi < 0 {
            return Err(Error::Domain("square root of a negative number".into()));
        }
        if self.lo < 0 {
            return Err(Error::Unresolved);
        }
        Ok(self.monotone(|x, r| x.sqrt_round(r)))
    }

    /// `self^y` for a positive base.
    pub fn pow(&self, y: &BigReal) -> Result<BigReal> {
        Ok(self.ln()?.mul(y).exp())
    }

    fn periodic(&self, f: impl Fn(&mut Float, Round) -> Ordering) -> BigReal {
        let p = self.bits();
        let (mut out, slack) = if self.is_point() {
            let mut v = self.lo.clone();
            let dir = f(&mut v, Round::Nearest);
            (bracket(v, dir), None)
        } else {
            // 1-Lipschitz: f(mid) widened by the radius.
            let mid = self.value();
            let mut v = Float::with_val(p, &mid);
            let dir = f(&mut v, Round::Nearest);
            let mut r = up(p, &self.hi - &mid);
            r = max_f(r, up(p, &mid - &self.lo));
            (bracket(v, dir), Some(r))
        };
        if let Some(r) = slack {
            out.lo = down(p, &out.lo - &r);
            out.hi = up(p, &out.hi + &r);
        }
        if out.lo < -1 {
            out.lo = Float::with_val(p, -1);
        }
        if out.hi > 1 {
            out.hi = Float::with_val(p, 1);
        }
        out
    }

    pub fn sin(&self) -> BigReal {
        self.periodic(|x, r| x.sin_round(r))
    }

    pub fn cos(&self) -> BigReal {
        self.periodic(|x, r| x.cos_round(r))
    }

    /// Certified floor; `Unresolved` if an integer lies in `(lo, hi]`.
    pub fn floor(&self) -> Result<Integer> {
        let a = self.lo.to_integer_round(Round::Down).ok_or_else(not_finite)?.0;
        let b = self.hi.to_integer_round(Round::Down).ok_or_else(not_finite)?.0;
        if a == b { Ok(a) } else { Err(Error::Unresolved) }
    }

    pub fn ceil(&self) -> Result<Integer> {
        let a = self.lo.to_integer_round(Round::Up).ok_or_else(not_finite)?.0;
        let b = self.hi.to_integer_round(Round::Up).ok_or_else(not_finite)?.0;
        if a == b { Ok(a) } else { Err(Error::Unresolved) }
    }

    /// Enclosure of `self - floor(self)`.
    pub fn frac(&self) -> Result<BigReal> {
        let k = self.floor()?;
        let out = self.sub_integer(&k);
        let p = out.bits();
        let lo = if out.lo < 0 { Float::with_val(p, 0) } else { out.lo };
        Ok(BigReal { lo, hi: out.hi })
    }

    /// Enclosure of the distance to the nearest integer.
    ///
    /// Never fails: the map is continuous, so a straddling input still has a
    /// valid (slightly wider) enclosure.
    pub fn dist_nearest_int(&self) -> BigReal {
        let p = self.bits();
        let k = self.lo.to_integer_round(Round::Nearest).map(|r| r.0).unwrap_or_default();
        let y = self.sub_integer(&k);
        let half = Float::with_val(p, 0.5);
        let zero = Float::with_val(p, 0);
        if y.hi <= half {
            if y.lo >= 0 {
                y
            } else if y.hi <= 0 {
                y.neg()
            } else {
                let m = max_f(-y.lo.clone(), y.hi.clone());
                BigReal { lo: zero, hi: m }
            }
        } else {
            // the enclosure crosses k + 1/2
            let lo = if y.hi >= 1 {
                zero
            } else {
                let a = if y.lo < 0 { -y.lo.clone() } else { y.lo.clone() };
                let b = down(p, 1 - &y.hi);
                let m = min_f(a, b);
                if y.lo < 0 { Float::with_val(p, 0) } else { m }
            };
            BigReal { lo, hi: half }
        }
    }

    /// Re-rounds to a (possibly lower) precision, still enclosing.
    pub fn with_bits(&self, bits: u32) -> BigReal {
        BigReal { lo: down(bits, &self.lo), hi: up(bits, &self.hi) }
    }
}

fn not_finite() -> Error {
    Error::Domain("non-finite value".into())
}

/// Serialized as the midpoint (nearest `f64`) and an upward-rounded radius
/// that also covers the conversion error of the midpoint.
impl Serialize for BigReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mid = self.to_f64();
        let p = self.bits().max(64);
        let lo_gap = up(p, Float::with_val(p, mid) - &self.lo);
        let hi_gap = up(p, &self.hi - Float::with_val(p, mid));
        let r = max_f(lo_gap, hi_gap).to_f64_round(Round::Up).max(0.0);
        let mut st = s.serialize_struct("BigReal", 2)?;
        st.serialize_field("value", &mid)?;
        st.serialize_field("radius", &r)?;
        st.end()
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.to_f64(), self.radius().to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn rational_enclosure_contains_value() {
        let x = BigReal::from_rational(&q("1/3"), 128);
        assert!(x.contains(&q("1/3")));
        assert!(!x.is_point());
        assert!(x.radius() < 1e-37);
        assert!(BigReal::from_rational(&q("3/4"), 64).is_point());
    }

    #[test]
    fn frac_and_floor() {
        let x = BigReal::from_rational(&q("11/4"), 128);
        assert_eq!(x.floor().unwrap(), 2);
        assert_eq!(x.frac().unwrap().to_f64(), 0.75);
        let y = BigReal::from_rational(&q("-1/4"), 128);
        assert_eq!(y.frac().unwrap().to_f64(), 0.75);
        let z = BigReal::from_u64(3, 128);
        assert_eq!(z.frac().unwrap().to_f64(), 0.0);
        // straddles 1
        let w = BigReal::from_endpoints(Float::with_val(64, 0.999), Float::with_val(64, 1.001)).unwrap();
        assert_eq!(w.frac(), Err(Error::Unresolved));
    }

    #[test]
    fn distance_to_integers() {
        let d = |s: &str| BigReal::from_rational(&q(s), 128).dist_nearest_int();
        assert_eq!(d("11/4").to_f64(), 0.25);
        assert!(d("1/3").contains(&q("1/3")));
        assert_eq!(d("15/2").to_f64(), 0.5);
        assert_eq!(d("-7/4").to_f64(), 0.25);
        let w = BigReal::from_endpoints(Float::with_val(64, 1.999), Float::with_val(64, 2.002)).unwrap();
        let e = w.dist_nearest_int();
        assert_eq!(e.lo().to_f64(), 0.0);
        assert!(e.hi().to_f64() >= 0.0019);
        let h = BigReal::from_endpoints(Float::with_val(64, 2.49), Float::with_val(64, 2.52)).unwrap();
        let e = h.dist_nearest_int();
        assert!(e.lo().to_f64() <= 0.48 && e.lo().to_f64() >= 0.47);
        assert_eq!(e.hi().to_f64(), 0.5);
    }

    #[test]
    fn transcendental_enclosures() {
        let two = BigReal::from_u64(2, 256);
        let l = two.ln().unwrap();
        let back = l.exp();
        assert!(back.contains(&q("2")));
        assert!(back.radius() < 1e-70);
        let s = two.sqrt().unwrap();
        assert!(s.mul(&s).contains(&q("2")));
        let half = BigReal::from_rational(&q("1/2"), 128);
        let c = BigReal::pi(128).mul(&half).sin();
        assert!(c.contains(&q("1")));
        assert!(BigReal::zero(64).ln().is_err());
    }

    #[test]
    fn interval_ops_enclose() {
        let a = BigReal::from_endpoints(Float::with_val(64, -1), Float::with_val(64, 2)).unwrap();
        let b = BigReal::from_endpoints(Float::with_val(64, -3), Float::with_val(64, 1)).unwrap();
        let m = a.mul(&b);
        assert_eq!(m.lo().to_f64(), -6.0);
        assert_eq!(m.hi().to_f64(), 3.0);
        assert_eq!(a.div(&b), Err(Error::Unresolved));
        assert!(BigReal::from_u64(1, 64).div(&BigReal::zero(64)).is_err());
        assert_eq!(a.abs().lo().to_f64(), 0.0);
    }

    #[test]
    fn wide_sine_is_lipschitz_widened() {
        let x = BigReal::from_endpoints(Float::with_val(64, 0.1), Float::with_val(64, 0.3)).unwrap();
        let s = x.sin();
        assert!(s.lo().to_f64() <= 0.1f64.sin());
        assert!(s.hi().to_f64() >= 0.3f64.sin());
    }
}
