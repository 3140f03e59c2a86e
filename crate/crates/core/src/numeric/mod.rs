//! Certified arithmetic kernel: enclosures, exact scalars, floors of powers
//! and the change of variables `t_a(x) = ln a / ln x`.

mod arith;
mod bigreal;
mod expr;
mod precision;
mod scalar;

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Integer, Rational};

pub use arith::{ext_gcd, gcd, inverse_mod, is_prime};
pub use bigreal::BigReal;
pub use expr::{Node, RealExpr};
pub use precision::{parse_bits, PrecisionPolicy, DEFAULT_CAP_BITS, DEFAULT_START_BITS, PRECISION_ENV};
pub use scalar::ExactScalar;

use crate::error::{Error, Result};

/// Nearest `f64` to `q` (rug's own conversion truncates).
pub fn rational_to_f64(q: &Rational) -> f64 {
    rug::Float::with_val(53, q).to_f64()
}

/// Enclosure of `{x}`; `Unresolved` when `x` straddles an integer.
pub fn frac(x: &BigReal) -> Result<BigReal> {
    x.frac()
}

/// Enclosure of `‖x‖`.
pub fn dist_nearest_int(x: &BigReal) -> BigReal {
    x.dist_nearest_int()
}

/// `n^α` when it is an integer, detected symbolically.
pub fn exact_pow(n: u64, alpha: &Rational) -> Option<Integer> {
    if *alpha < 0 {
        return None;
    }
    let u = alpha.numer().to_u32()?;
    let v = alpha.denom().to_u32()?;
    if n <= 1 {
        return Some(Integer::from(n));
    }
    if v == 1 {
        return Some(Integer::from(n).pow(u));
    }
    // a perfect v-th power above 1 is at least 2^v
    if v >= 64 {
        return None;
    }
    let (root, rem) = Integer::from(n).root_rem(Integer::new(), v);
    (rem == 0).then(|| root.pow(u))
}

/// Enclosure of `n^α` at `bits` of working precision.
pub fn pow_enclosure(n: u64, alpha: &ExactScalar, bits: u32) -> Result<BigReal> {
    if n == 0 {
        return Err(Error::Domain("power of zero".into()));
    }
    if let Some(k) = exact_pow(n, alpha.value()) {
        return Ok(BigReal::from_integer(&k, bits));
    }
    let ln_n = BigReal::from_u64(n, bits).ln()?;
    Ok(ln_n.mul(&alpha.enclose(bits)).exp())
}

/// `⌊n^α⌋` at a single precision; `Unresolved` if the enclosure straddles an
/// integer.
pub fn floor_pow_at(n: u64, alpha: &ExactScalar, bits: u32) -> Result<Integer> {
    if n == 0 {
        return Err(Error::Domain("floor_pow needs n >= 1".into()));
    }
    if *alpha.value() <= 0 {
        return Err(Error::Domain("floor_pow needs alpha > 0".into()));
    }
    if let Some(k) = exact_pow(n, alpha.value()) {
        return Ok(k);
    }
    pow_enclosure(n, alpha, bits)?.floor()
}

/// The exact `⌊n^α⌋`.
pub fn floor_pow(n: u64, alpha: &ExactScalar, policy: &PrecisionPolicy) -> Result<Integer> {
    policy.certify(format_args!("floor({n}^{alpha})"), |bits| floor_pow_at(n, alpha, bits))
}

/// Largest intermediate size (in bits) for which comparisons are done in
/// exact integer arithmetic.
const EXACT_CMP_BITS: f64 = 16_384.0;

/// Exact comparison of `k^α` with a positive rational `z`.
pub fn cmp_pow(k: u64, alpha: &ExactScalar, z: &Rational, policy: &PrecisionPolicy) -> Result<Ordering> {
    if k == 0 {
        return Err(Error::Domain("cmp_pow needs k >= 1".into()));
    }
    if *z <= 0 {
        return Ok(Ordering::Greater);
    }
    let a = alpha.value();
    if let Some(p) = exact_pow(k, a) {
        return Ok(Rational::from(p).cmp(z));
    }
    // k^(u/v) vs z  <=>  k^u * den^v vs num^v for positive alpha
    if *a > 0 {
        if let (Some(u), Some(v)) = (a.numer().to_u32(), a.denom().to_u32()) {
            let size = u as f64 * (k as f64).log2()
                + v as f64 * (z.denom().significant_bits() as f64 + z.numer().significant_bits() as f64);
            if size <= EXACT_CMP_BITS {
                let lhs = Integer::from(k).pow(u) * Integer::from(z.denom().pow(v));
                let rhs = Integer::from(z.numer().pow(v));
                return Ok(lhs.cmp(&rhs));
            }
        }
    }
    // k^α is irrational here, so the ladder can only fail on precision.
    policy.certify(format_args!("{k}^{alpha} vs {z}"), |bits| {
        pow_enclosure(k, alpha, bits)?.cmp_rational(z).ok_or(Error::Unresolved)
    })
}

/// Smallest `k >= 1` with `k^α >= y`, i.e. `⌈y^{1/α}⌉` for `y >= 1`.
pub fn ceil_root(y: &Integer, alpha: &ExactScalar, policy: &PrecisionPolicy) -> Result<u64> {
    if *y <= 1 {
        return Ok(1);
    }
    if *alpha.value() < 1 {
        return Err(Error::Domain("ceil_root needs alpha >= 1".into()));
    }
    let target = Rational::from(y.clone());
    let inv = Rational::from(alpha.value().recip_ref());
    let guess = BigReal::from_integer(y, 128).pow(&BigReal::from_rational(&inv, 128))?;
    // ⌈y^{1/α}⌉ directly when the enclosure decides it
    if let Some(k) = guess.ceil().ok().and_then(|k| k.to_u64()) {
        return Ok(k.max(1));
    }
    let mut k = guess.lo().to_integer_round(rug::float::Round::Down).map(|r| r.0).unwrap_or_default();
    if k < 1 {
        k = Integer::from(1);
    }
    let mut k = k.to_u64().ok_or_else(|| Error::Domain(format!("root of {y} exceeds u64")))?;
    while k > 1 && cmp_pow(k - 1, alpha, &target, policy)? != Ordering::Less {
        k -= 1;
    }
    while cmp_pow(k, alpha, &target, policy)? == Ordering::Less {
        k += 1;
    }
    Ok(k)
}

/// Whether `y = ⌊k^α⌋` for some `k`, for `α >= 1`.
pub fn is_member(y: &Integer, alpha: &ExactScalar, policy: &PrecisionPolicy) -> Result<bool> {
    if *y < 1 {
        return Err(Error::Domain("membership needs y >= 1".into()));
    }
    let k = ceil_root(y, alpha, policy)?;
    Ok(floor_pow(k, alpha, policy)? == *y)
}

/// `k` with `θ^k = a` exactly, for small `k`.
fn exact_log_ratio(a: &Rational, theta: &Rational) -> Option<u32> {
    let mut p = theta.clone();
    for k in 1..=64u32 {
        match p.cmp(a) {
            Ordering::Equal => return Some(k),
            Ordering::Less => return None,
            Ordering::Greater => p *= theta,
        }
    }
    None
}

fn check_base(a: &Rational) -> Result<()> {
    if *a <= 0 || *a >= 1 {
        return Err(Error::Domain(format!("a = {a} is not in (0,1)")));
    }
    Ok(())
}

/// `t_a(θ) = ln a / ln θ` for `0 < a < 1` and `θ ∈ [a, 1)`.
pub fn t_map(a: &ExactScalar, theta: &ExactScalar, bits: u32) -> Result<BigReal> {
    check_base(a.value())?;
    let (av, tv) = (a.value(), theta.value());
    if tv < av || *tv >= 1 {
        return Err(Error::Domain(format!("theta = {theta} is not in [{a}, 1)")));
    }
    if let Some(k) = exact_log_ratio(av, tv) {
        return Ok(BigReal::from_u64(k as u64, bits));
    }
    a.enclose(bits).ln()?.div(&theta.enclose(bits).ln()?)
}

/// `t_a` on an enclosure of θ (for θ known only as an enclosure inside (a, 1)).
pub fn t_map_enclosure(a: &BigReal, theta: &BigReal) -> Result<BigReal> {
    a.ln()?.div(&theta.ln()?)
}

fn exact_root(q: &Rational, n: u32) -> Option<Rational> {
    if n == 0 || *q < 0 {
        return None;
    }
    let (rn, en) = q.numer().clone().root_rem(Integer::new(), n);
    let (rd, ed) = q.denom().clone().root_rem(Integer::new(), n);
    (en == 0 && ed == 0).then(|| Rational::from((rn, rd)))
}

/// `a^{1/α}`, the inverse of `t_a`, for `0 < a < 1` and `α >= 1`.
pub fn inv_t_map(a: &ExactScalar, alpha: &ExactScalar, bits: u32) -> Result<BigReal> {
    check_base(a.value())?;
    let al = alpha.value();
    if *al < 1 {
        return Err(Error::Domain(format!("alpha = {alpha} is below 1")));
    }
    if let (Some(u), Some(v)) = (al.numer().to_u32(), al.denom().to_u32()) {
        if u <= 64 {
            if let Some(r) = exact_root(a.value(), u) {
                if let Some(p) = expr::Node::Pow(
                    Box::new(expr::Node::num(r)),
                    Box::new(expr::Node::num(Rational::from(v))),
                )
                .as_rational()
                {
                    return Ok(BigReal::from_rational(&p, bits));
                }
            }
        }
    }
    let inv = Rational::from(al.recip_ref());
    Ok(a.enclose(bits).ln()?.mul(&BigReal::from_rational(&inv, bits)).exp())
}

/// `q̄ ∈ {1, …, p−1}` with `q q̄ ≡ 1 (mod p)`, for an odd prime `p`.
pub fn mod_inverse(q: i64, p: u64) -> Result<u64> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    inverse_mod(q, p).ok_or(Error::NotInvertible { q, p })
}
