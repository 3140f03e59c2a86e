//! Counting integer solutions of `|qr − ps| ≤ L` and of its perturbed form
//! `|q(r − φ_p(r/p)) − p(s − φ_q(s/q))| ≤ L`, with brute-force oracles.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::OpenInterval;
use crate::numeric::{is_prime, mod_inverse, rational_to_f64, BigReal, Node, PrecisionPolicy, RealExpr};
use crate::systems::{PerturbationFamily, PsiFamily};

/// Default ceiling on oracle work units.
pub const DEFAULT_WORK_CAP: u128 = 200_000_000;

const MAX_BAND: u64 = 1 << 40;

/// How the moduli `q` are chosen from the band `{Q, …, 2Q−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QsetSpec {
    /// every `q` in the band not divisible by `p`
    Band,
    /// the primes of the band
    Primes,
    List(Vec<u64>),
}

impl QsetSpec {
    pub fn resolve(&self, p: u64, big_q: u64) -> Vec<u64> {
        let band = big_q..big_q.saturating_mul(2);
        match self {
            QsetSpec::Band => band.filter(|q| p == 0 || q % p != 0).collect(),
            QsetSpec::Primes => band.filter(|&q| q != p && is_prime(q)).collect(),
            QsetSpec::List(v) => v.clone(),
        }
    }
}

/// `band`, `primes`, or a comma-separated list such as `17,19`.
impl FromStr for QsetSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "band" | "all" => Ok(QsetSpec::Band),
            "primes" => Ok(QsetSpec::Primes),
            "" | "empty" => Ok(QsetSpec::List(Vec::new())),
            list => list
                .trim_start_matches("list:")
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad modulus {t:?} in qset"))))
                .collect::<Result<Vec<_>>>()
                .map(QsetSpec::List),
        }
    }
}

impl fmt::Display for QsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QsetSpec::Band => f.write_str("band"),
            QsetSpec::Primes => f.write_str("primes"),
            QsetSpec::List(v) if v.is_empty() => f.write_str("empty"),
            QsetSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeQuery {
    pub p: u64,
    #[serde(rename = "Q")]
    pub big_q: u64,
    pub qset: Vec<u64>,
    #[serde(rename = "L")]
    pub l: RealExpr,
    #[serde(rename = "J")]
    pub j: OpenInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PerturbationFamily>,
}

impl LatticeQuery {
    /// Builds and validates a query; `qset` is sorted.
    pub fn new(
        p: u64,
        big_q: u64,
        mut qset: Vec<u64>,
        l: RealExpr,
        j: OpenInterval,
        phi: Option<PerturbationFamily>,
    ) -> Result<Self> {
        qset.sort_unstable();
        let q = LatticeQuery { p, big_q, qset, l, j, phi };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidQuery(m));
        if self.p < 3 || !is_prime(self.p) {
            return bad(format!("p = {} is not an odd prime", self.p));
        }
        if self.big_q <= self.p {
            return bad(format!("Q = {} must exceed p = {}", self.big_q, self.p));
        }
        if self.big_q >= MAX_BAND {
            return bad(format!("Q = {} is too large", self.big_q));
        }
        for w in self.qset.windows(2) {
            if w[0] >= w[1] {
                return bad(format!("qset must be strictly increasing, found {} before {}", w[0], w[1]));
            }
        }
        if let Some(q) = self.qset.iter().find(|&&q| q < self.big_q || q >= 2 * self.big_q) {
            return bad(format!("q = {q} is outside the band [{}, {}]", self.big_q, 2 * self.big_q - 1));
        }
        if let Some(q) = self.qset.iter().find(|&&q| q % self.p == 0) {
            return bad(format!("q = {q} is a multiple of p = {}", self.p));
        }
        self.j.validate()?;
        let at_least_one = match self.l.as_rational() {
            Some(l) => *l >= 1,
            None => self.l.enclose(128)?.cmp_rational(&Rational::from(1)) == Some(std::cmp::Ordering::Greater),
        };
        if !at_least_one {
            return Err(Error::Precondition(format!("L = {} must be at least 1", self.l)));
        }
        if let Some(phi) = &self.phi {
            phi.validate()?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let q: LatticeQuery = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        q.validate()?;
        Ok(q)
    }

    fn r_range(&self) -> Result<std::ops::RangeInclusive<i64>> {
        self.j.scaled_integers(self.p)
    }

    fn phi(&self) -> Result<&PerturbationFamily> {
        self.phi
            .as_ref()
            .ok_or_else(|| Error::InvalidQuery("a perturbation phi is required".into()))
    }

    fn l_ceil(&self) -> Result<u64> {
        let c = match self.l.as_rational() {
            Some(l) => l.clone().ceil().into_numer_denom().0,
            None => self.l.enclose(128)?.hi().clone().ceil().to_integer().expect("finite"),
        };
        c.to_u64().ok_or_else(|| Error::InvalidQuery(format!("L = {} is too large", self.l)))
    }

    fn oracle_work(&self, per_pair: u128) -> u128 {
        let r = self.r_range().map(|r| r.count() as u128).unwrap_or(u128::MAX);
        (self.qset.len() as u128).saturating_mul(r).saturating_mul(per_pair)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub count: u64,
    /// `λ(J)⌈L⌉|𝒬| + Q (log Q)²`
    pub bound_basic: f64,
    pub omega: Option<f64>,
    pub hypothesis_ok: Option<bool>,
    /// `λ(J)(⌈L⌉|𝒬| + ω⁻¹ Q (log Q)²)`
    pub bound_perturbed: Option<f64>,
    /// count over the applicable bound
    pub ratio: Option<f64>,
}

fn q_log_sq(big_q: u64) -> f64 {
    let q = big_q as f64;
    q * q.ln().powi(2)
}

fn bound_basic(q: &LatticeQuery) -> Result<f64> {
    Ok(rational_to_f64(&q.j.length()) * q.l_ceil()? as f64 * q.qset.len() as f64 + q_log_sq(q.big_q))
}

fn ratio(count: u64, bound: f64) -> Option<f64> {
    (bound > 0.0).then(|| count as f64 / bound)
}

/// Exact `L = num/den` with machine-size parts, for the integer fast paths.
fn small_rational(l: &RealExpr) -> Option<(i128, i128)> {
    let l = l.as_rational()?;
    Some((l.numer().to_i64()? as i128, l.denom().to_i64()? as i128))
}

/// `#{s : |x − ps| ≤ L}` for an integer `x`.
fn s_count(x: i128, p: u64, l: &RealExpr, policy: &PrecisionPolicy) -> Result<i128> {
    let p = p as i128;
    let (hi, lo) = match small_rational(l) {
        Some((num, den)) => {
            let hi = (x * den + num).div_euclid(p * den);
            let lo = -((-x * den + num).div_euclid(p * den));
            (hi, lo)
        }
        None => policy.certify("s-range endpoints", |bits| {
            let l = l.enclose(bits)?;
            let x = Integer::from(x);
            let hi = l.add_integer(&x).div_u64(p as u64).floor()?;
            let lo = l.neg().add_integer(&x).div_u64(p as u64).ceil()?;
            Ok((hi.to_i128().expect("fits"), lo.to_i128().expect("fits")))
        })?,
    };
    Ok((hi - lo + 1).max(0))
}

/// Deterministic in-order sum of per-`q` results.
fn sum_over_q(qset: &[u64], f: impl Fn(u64) -> Result<u64> + Sync) -> Result<u64> {
    let parts: Vec<Result<u64>> = qset.par_iter().map(|&q| f(q)).collect();
    parts.into_iter().try_fold(0u64, |acc, c| Ok(acc + c?))
}

fn basic_count(query: &LatticeQuery, policy: &PrecisionPolicy) -> Result<u64> {
    let rs = query.r_range()?;
    sum_over_q(&query.qset, |q| {
        let mut total = 0i128;
        for r in rs.clone() {
            total += s_count(q as i128 * r as i128, query.p, &query.l, policy)?;
        }
        Ok(total as u64)
    })
}

/// `#{(q, r, s) : q ∈ 𝒬, r/p ∈ J, |qr − ps| ≤ L}`; `s` is unrestricted.
pub fn count_basic(query: &LatticeQuery, policy: &PrecisionPolicy) -> Result<CountReport> {
    query.validate()?;
    if query.phi.as_ref().is_some_and(|phi| !phi.is_zero()) {
        return Err(Error::InvalidQuery("the basic count takes no perturbation".into()));
    }
    let count = basic_count(query, policy)?;
    let bound = bound_basic(query)?;
    Ok(CountReport {
        count,
        bound_basic: bound,
        omega: None,
        hypothesis_ok: None,
        bound_perturbed: None,
        ratio: ratio(count, bound),
    })
}

/// Same count through the residues `r ≡ q̄ℓ (mod p)`, `|ℓ| ≤ L`.
pub fn count_basic_congruence(query: &LatticeQuery, policy: &PrecisionPolicy) -> Result<u64> {
    query.validate()?;
    let l_floor = match query.l.as_rational() {
        Some(l) => l.clone().floor().into_numer_denom().0,
        None => policy.certify("floor of L", |bits| query.l.enclose(bits)?.floor())?,
    };
    let l_floor = l_floor.to_i64().ok_or_else(|| Error::InvalidQuery("L is too large".into()))?;
    let rs = query.r_range()?;
    if rs.is_empty() {
        return Ok(0);
    }
    let (r0, r1) = (*rs.start() as i128, *rs.end() as i128);
    let p = query.p as i128;
    // #{r ∈ [r0, r1] : r ≡ c (mod p)}
    let in_class = |c: i128| (r1 - c).div_euclid(p) - (r0 - 1 - c).div_euclid(p);
    sum_over_q(&query.qset, |q| {
        let inv = mod_inverse(q as i64, query.p)? as i128;
        Ok((-l_floor..=l_floor).map(|ell| in_class((inv * ell as i128).rem_euclid(p))).sum::<i128>() as u64)
    })
}

/// Reference count by scanning a window of `s` around `qr/p` for every pair.
pub fn count_basic_oracle(query: &LatticeQuery, policy: &PrecisionPolicy, work_cap: u128) -> Result<u64> {
    query.validate()?;
    let l_ceil = query.l_ceil()? as i128;
    let per_pair = 2 * l_ceil as u128 / query.p as u128 + 2;
    let work = query.oracle_work(per_pair);
    if work > work_cap {
        return Err(Error::WorkCapExceeded { work, cap: work_cap });
    }
    let p = query.p as i128;
    let l_exact = query.l.as_rational().cloned();
    let within = |d: i128| -> Result<bool> {
        match &l_exact {
            Some(l) => Ok(Rational::from(d) <= *l),
            None => policy.certify("|qr - ps| <= L", |bits| BigReal::from_integer(&Integer::from(d), bits).le(&query.l.enclose(bits)?)),
        }
    };
    let mut count = 0u64;
    for &q in &query.qset {
        for r in query.r_range()? {
            let x = q as i128 * r as i128;
            for s in (x - l_ceil).div_euclid(p) - 1..=(x + l_ceil).div_euclid(p) + 1 {
                if within((x - p * s).abs())? {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Certified `ω` and the admissibility inequality between `ω` and the drift terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaReport {
    /// certified lower bound for `ω`, rounded to nearest
    pub omega: f64,
    /// certified upper bound for `10 max(1/p, L/(pQ), ‖φ_n‖/n)`
    pub rhs: f64,
    pub hypothesis_ok: bool,
}

/// `ω = min_n min(λ(J), L/(Q‖φ_n′‖)) / 10` over `n ∈ {p} ∪ 𝒬`; the inequality
/// is reported as holding only when the enclosures decide it.
pub fn omega(query: &LatticeQuery, policy: &PrecisionPolicy) -> Result<OmegaReport> {
    query.validate()?;
    let phi = query.phi()?;
    let bits = policy.start_bits;
    let lam = BigReal::from_rational(&query.j.length(), bits);
    let l = query.l.enclose(bits)?;
    let mut w = lam.lo().clone();
    let mut rhs = BigReal::from_u64(1, bits).div_u64(query.p).hi().clone();
    let drift_l = l.div_u64(query.p).div_u64(query.big_q);
    if *drift_l.hi() > rhs {
        rhs = drift_l.hi().clone();
    }
    for n in std::iter::once(query.p).chain(query.qset.iter().copied()) {
        let d = phi.sup_abs_derivative(n, &query.j, bits)?;
        if d > 0 {
            let denom = BigReal::from_endpoints(d.clone(), d)?.mul_u64(query.big_q);
            let t = l.div(&denom)?;
            if *t.lo() < w {
                w = t.lo().clone();
            }
        }
        let s = phi.sup_abs(n, &query.j, bits)?;
        let drift = BigReal::from_endpoints(s.clone(), s)?.div_u64(n);
        if *drift.hi() > rhs {
            rhs = drift.hi().clone();
        }
    }
    let w = BigReal::from_endpoints(w.clone(), w)?.div_u64(10);
    let rhs = BigReal::from_endpoints(rhs.clone(), rhs)?.mul_u64(10);
    Ok(OmegaReport {
        omega: w.lo().to_f64(),
        rhs: rhs.hi().to_f64(),
        hypothesis_ok: *w.lo() >= *rhs.hi(),
    })
}

/// `q(r − φ_p(r/p))`
fn shifted(n: u64, k: i64, m: u64, phi: &PerturbationFamily, bits: u32) -> Result<BigReal> {
    let theta = BigReal::from_rational(&Rational::from((k, n)), bits);
    Ok(BigReal::from_i64(k, bits).sub(&phi.value(n, &theta)?).mul_u64(m))
}

/// Decides one perturbed inequality, escalating precision as needed.
fn perturbed_hit(query: &LatticeQuery, phi: &PerturbationFamily, q: u64, r: i64, s: i64, policy: &PrecisionPolicy) -> Result<bool> {
    if phi.is_zero() {
        let d = (q as i128 * r as i128 - query.p as i128 * s as i128).abs();
        if let Some(l) = query.l.as_rational() {
            return Ok(Rational::from(d) <= *l);
        }
    }
    policy.certify("perturbed lattice inequality", |bits| {
        let a = shifted(query.p, r, q, phi, bits)?;
        let b = shifted(q, s, query.p, phi, bits)?;
        a.sub(&b).abs().le(&query.l.enclose(bits)?)
    })
}

fn float_to_i64(x: &Float, floor: bool) -> Result<i64> {
    let i = if floor { x.clone().floor() } else { x.clone().ceil() };
    i.to_integer()
        .and_then(|i| i.to_i64())
        .ok_or_else(|| Error::Domain("s-bracket endpoint is not a machine integer".into()))
}

fn perturbed_count(query: &LatticeQuery, policy: &PrecisionPolicy) -> Result<u64> {
    let phi = query.phi()?;
    let bits = policy.start_bits;
    let rs = query.r_range()?;
    let l = query.l.enclose(bits)?;
    sum_over_q(&query.qset, |q| {
        let ss = query.j.scaled_integers(q)?;
        if ss.is_empty() {
            return Ok(0);
        }
        let m = phi.sup_abs(q, &query.j, bits)?;
        let m = BigReal::from_endpoints(m.clone(), m)?;
        let mut count = 0;
        for r in rs.clone() {
            // s − φ_q(s/q) ∈ [(A − L)/p, (A + L)/p] and |φ_q| ≤ M
            let a = shifted(query.p, r, q, phi, bits)?;
            let lo = a.sub(&l).div_u64(query.p).sub(&m);
            let hi = a.add(&l).div_u64(query.p).add(&m);
            let s0 = float_to_i64(lo.lo(), true)?.max(*ss.start());
            let s1 = float_to_i64(hi.hi(), false)?.min(*ss.end());
            for s in s0..=s1 {
                if perturbed_hit(query, phi, q, r, s, policy)? {
                    count += 1;
                }
            }
        }
        Ok(count)
    })
}

/// `#{(q, r, s) : q ∈ 𝒬, r/p, s/q ∈ J, |q(r − φ_p(r/p)) − p(s − φ_q(s/q))| ≤ L}`.
pub fn count_perturbed(query: &LatticeQuery, policy: &PrecisionPolicy) -> Result<CountReport> {
    query.validate()?;
    let count = perturbed_count(query, policy)?;
    let om = omega(query, policy)?;
    let basic = bound_basic(query)?;
    let bound = if om.omega > 0.0 {
        Some(rational_to_f64(&query.j.length()) * (query.l_ceil()? as f64 * query.qset.len() as f64 + q_log_sq(query.big_q) / om.omega))
    } else {
        None
    };
    Ok(CountReport {
        count,
        bound_basic: basic,
        omega: Some(om.omega),
        hypothesis_ok: Some(om.hypothesis_ok),
        bound_perturbed: bound,
        ratio: bound.and_then(|b| ratio(count, b)),
    })
}

/// Reference perturbed count: every `s ∈ qJ` for every pair, no bracketing.
pub fn count_perturbed_oracle(query: &LatticeQuery, policy: &PrecisionPolicy, work_cap: u128) -> Result<u64> {
    query.validate()?;
    let phi = query.phi()?;
    let widest = query.qset.iter().map(|&q| query.j.scaled_integers(q).map(|s| s.count() as u128)).try_fold(0u128, |a, c| Ok::<_, Error>(a.max(c?)))?;
    let work = query.oracle_work(widest);
    if work > work_cap {
        return Err(Error::WorkCapExceeded { work, cap: work_cap });
    }
    let mut count = 0;
    for &q in &query.qset {
        for r in query.r_range()? {
            for s in query.j.scaled_integers(q)? {
                if perturbed_hit(query, phi, q, r, s, policy)? {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// The overlap count of the main proof: band `{Q, …, 2Q−1} \ pℤ` and
/// `L = 4·(2Q)·ψ_p`.
pub fn overlap_query_from_systems(
    p: u64,
    big_q: u64,
    psi: &PsiFamily,
    phi: &PerturbationFamily,
    j: &OpenInterval,
) -> Result<LatticeQuery> {
    if big_q <= p {
        return Err(Error::Precondition(format!("band Q = {big_q} must lie above p = {p}")));
    }
    psi.validate()?;
    let scale = Rational::from(8 * big_q);
    let l = match psi.exact(p)? {
        Some(v) => RealExpr::rational(scale * v),
        None => match psi {
            PsiFamily::PowerLaw { c, sigma } => {
                let c = c.value().clone().min(Rational::from((1, 10)));
                RealExpr::from_node(Node::Div(
                    Box::new(Node::num(scale * c)),
                    Box::new(Node::Pow(Box::new(Node::num(Rational::from(p))), Box::new(sigma.node().clone()))),
                ))
            }
            _ => unreachable!("constant and table values are exact"),
        },
    };
    let qset = QsetSpec::Band.resolve(p, big_q);
    LatticeQuery::new(p, big_q, qset, l, j.clone(), Some(phi.clone()))
}
