use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BigReal;
use crate::error::{Error, Result};

/// An exactly known input value: a fraction, or a decimal literal whose
/// text is kept so it can be echoed back unchanged.
#[derive(Clone, Debug)]
pub enum ExactScalar {
    Rational(Rational),
    Decimal { value: Rational, text: String },
}

impl ExactScalar {
    pub fn from_rational(q: Rational) -> Self {
        ExactScalar::Rational(q)
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::Rational(Rational::from(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ExactScalar::Rational(Rational::from((n, d)))
    }

    /// A terminating decimal keeps its decimal spelling; anything else stays a fraction.
    pub fn from_rational_decimal(q: Rational) -> Self {
        let mut rest = q.denom().clone();
        let twos = rest.find_one(0).unwrap_or(0);
        rest >>= twos;
        let mut fives = 0u32;
        while rest.is_divisible_u(5) {
            rest /= 5u32;
            fives += 1;
        }
        let scale = twos.max(fives) as usize;
        if rest != 1 || scale == 0 {
            return ExactScalar::Rational(q);
        }
        let scaled = (q.numer() * Integer::from(10u32).pow(scale as u32)) / q.denom();
        let mut body = Integer::from(scaled.abs_ref()).to_string();
        if body.len() <= scale {
            body = format!("{}{body}", "0".repeat(scale + 1 - body.len()));
        }
        let (int_part, frac_part) = body.split_at(body.len() - scale);
        let sign = if scaled < 0 { "-" } else { "" };
        ExactScalar::Decimal { value: q, text: format!("{sign}{int_part}.{frac_part}") }
    }

    pub fn value(&self) -> &Rational {
        match self {
            ExactScalar::Rational(q) => q,
            ExactScalar::Decimal { value, .. } => value,
        }
    }

    pub fn into_rational(self) -> Rational {
        match self {
            ExactScalar::Rational(q) => q,
            ExactScalar::Decimal { value, .. } => value,
        }
    }

    pub fn enclose(&self, bits: u32) -> BigReal {
        BigReal::from_rational(self.value(), bits)
    }

    pub fn is_integer(&self) -> bool {
        *self.value().denom() == 1
    }

    pub fn is_positive(&self) -> bool {
        *self.value() > 0
    }

    /// Lossy, for reporting only.
    pub fn to_f64(&self) -> f64 {
        super::rational_to_f64(self.value())
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    if exp.unsigned_abs() > 10_000 {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let num = Integer::from_str(if joined.is_empty() { "0" } else { &joined }).ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    let mut q = Rational::from(num);
    if scale >= 0 {
        q *= ten.pow(scale as u32);
    } else {
        q /= ten.pow((-scale) as u32);
    }
    if neg {
        q = -q;
    }
    Some(q)
}

/// Equality is by value; `0.5`, `0.50` and `1/2` are equal.
impl PartialEq for ExactScalar {
    fn eq(&self, other: &Self) -> bool {
        self.value() == other.value()
    }
}

impl Eq for ExactScalar {}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self> {
        let s = raw.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = Integer::from_str(n.trim()).map_err(|_| Error::Parse(format!("bad numerator in {raw:?}")))?;
            let d = Integer::from_str(d.trim()).map_err(|_| Error::Parse(format!("bad denominator in {raw:?}")))?;
            if d == 0 {
                return Err(Error::Parse(format!("zero denominator in {raw:?}")));
            }
            return Ok(ExactScalar::Rational(Rational::from((n, d))));
        }
        let value = parse_decimal(s).ok_or_else(|| Error::Parse(format!("not an exact scalar: {raw:?}")))?;
        if s.contains(['.', 'e', 'E']) {
            Ok(ExactScalar::Decimal { value, text: s.to_string() })
        } else {
            Ok(ExactScalar::Rational(value))
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactScalar::Rational(q) => write!(f, "{q}"),
            ExactScalar::Decimal { text, .. } => f.write_str(text),
        }
    }
}

impl From<Rational> for ExactScalar {
    fn from(q: Rational) -> Self {
        ExactScalar::Rational(q)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from_int(n)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    #[test]
    fn terminating_fractions_print_as_decimals() {
        let d = ExactScalar::from_rational_decimal(Rational::from((3, 8)));
        assert_eq!(d.to_string(), "0.375");
        let d = ExactScalar::from_rational_decimal(Rational::from((-201, 100)));
        assert_eq!(d.to_string(), "-2.01");
        assert_eq!(ExactScalar::from_rational_decimal(Rational::from((1, 3))).to_string(), "1/3");
        assert_eq!(ExactScalar::from_rational_decimal(Rational::from(7)).to_string(), "7");
        assert_eq!(d.to_string().parse::<ExactScalar>().unwrap(), d);
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(*parse("6/4").value(), Rational::from((3, 2)));
        assert_eq!(*parse("-0.25").value(), Rational::from((-1, 4)));
        assert_eq!(*parse("2.75").value(), Rational::from((11, 4)));
        assert_eq!(*parse("1e-3").value(), Rational::from((1, 1000)));
        assert_eq!(*parse("1.5E2").value(), Rational::from(150));
        assert_eq!(*parse(".5").value(), Rational::from((1, 2)));
        assert_eq!(*parse("7").value(), Rational::from(7));
        assert!(matches!(parse("0.618034"), ExactScalar::Decimal { .. }));
        assert!(matches!(parse("3"), ExactScalar::Rational(_)));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "1e", "0x10", "1/2/3", "nan", "inf"] {
            assert!(bad.parse::<ExactScalar>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips_text() {
        assert_eq!(parse("0.6180339887").to_string(), "0.6180339887");
        assert_eq!(parse("2/4").to_string(), "1/2");
        let json = serde_json::to_string(&parse("1.90")).unwrap();
        assert_eq!(json, "\"1.90\"");
        let back: ExactScalar = serde_json::from_str(&json).unwrap();
        assert_eq!(*back.value(), Rational::from((19, 10)));
    }
}
