//! Piatetski-Shapiro sequences `PS(α) = {⌊n^α⌋}` and the linear equation
//! `y = (a₁/a₂)x + b` with both sides in `PS(α)`.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::{HalfOpenInterval, OpenInterval};
use crate::numeric::{
    self, ceil_root, cmp_pow, exact_pow, floor_pow, gcd, inverse_mod, pow_enclosure, t_map, BigReal, ExactScalar,
    Node, PrecisionPolicy, RealExpr,
};
use crate::systems::{PerturbationFamily, PsiFamily, SolutionRecord, SystemInstance, TwistExponent, TwistFamily};

pub use crate::numeric::is_member;

fn integer_as_number<S: Serializer>(x: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_u64() {
        Some(v) => s.serialize_u64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

/// `⌊n^α⌋`.
pub fn ps_value(n: u64, alpha: &ExactScalar, policy: &PrecisionPolicy) -> Result<Integer> {
    floor_pow(n, alpha, policy)
}

/// `a₂ y = a₁ x + b₂`, i.e. `y = ax + b` with `a = a₁/a₂` and `b = b₂/a₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PSEquation {
    pub a1: u64,
    pub a2: u64,
    pub b2: i64,
    /// `a₁ d ≡ −b₂ (mod a₂)`, so `ax + b ∈ ℤ` iff `x ≡ d (mod a₂)`.
    pub d: u64,
}

pub fn make_equation(a1: u64, a2: u64, b2: i64) -> Result<PSEquation> {
    if a1 == 0 || a2 == 0 {
        return Err(Error::Precondition("a1 and a2 must be positive".into()));
    }
    if gcd(a1, a2) != 1 {
        return Err(Error::NotCoprime { a1, a2 });
    }
    let a1_signed = i64::try_from(a1).map_err(|_| Error::Precondition("a1 too large".into()))?;
    let inv = inverse_mod(a1_signed, a2).expect("coprime");
    let d = (-(b2 as i128)).rem_euclid(a2 as i128) * inv as i128 % a2 as i128;
    Ok(PSEquation { a1, a2, b2, d: d as u64 })
}

impl PSEquation {
    pub fn a(&self) -> Rational {
        Rational::from((self.a1, self.a2))
    }

    pub fn b(&self) -> Rational {
        Rational::from((self.b2, self.a2 as i64))
    }

    /// `a₁x + b₂`, the numerator of `ax + b`.
    fn numerator(&self, x: &Integer) -> Integer {
        Integer::from(x * self.a1) + self.b2
    }

    /// `ax + b` when it is a positive integer.
    pub fn image(&self, x: &Integer) -> Option<Integer> {
        let v = self.numerator(x);
        (v > 0 && v.is_divisible(&Integer::from(self.a2))).then(|| v / self.a2)
    }
}

/// The same equation solved for `x`, so that `0 < a < 1`. The flag says
/// whether the roles of `x` and `y` were swapped.
pub fn orient(eq: &PSEquation) -> Result<(PSEquation, bool)> {
    match eq.a1.cmp(&eq.a2) {
        Ordering::Less => Ok((*eq, false)),
        Ordering::Greater => Ok((make_equation(eq.a2, eq.a1, -eq.b2)?, true)),
        Ordering::Equal => Err(Error::Precondition("a = 1 cannot be oriented into (0,1)".into())),
    }
}

/// Smallest `(x, y) ∈ ℕ²` with `a₂y = a₁x + b₂`.
pub fn first_natural_solution(eq: &PSEquation) -> (u64, u64) {
    let mut x = if eq.d == 0 { eq.a2 } else { eq.d };
    loop {
        if let Some(y) = eq.image(&Integer::from(x)) {
            if y >= 1 {
                return (x, y.to_u64().expect("small"));
            }
        }
        x += eq.a2;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionPair {
    pub n: u64,
    pub k: u64,
    #[serde(serialize_with = "integer_as_number")]
    pub x: Integer,
    #[serde(serialize_with = "integer_as_number")]
    pub y: Integer,
}

fn check_alpha(alpha: &ExactScalar) -> Result<()> {
    if *alpha.value() < 1 {
        return Err(Error::Precondition(format!("alpha = {alpha} must be at least 1")));
    }
    Ok(())
}

fn pair_at(eq: &PSEquation, alpha: &ExactScalar, n: u64, policy: &PrecisionPolicy) -> Result<Option<SolutionPair>> {
    let x = ps_value(n, alpha, policy)?;
    let Some(y) = eq.image(&x) else { return Ok(None) };
    let k = ceil_root(&y, alpha, policy)?;
    if floor_pow(k, alpha, policy)? != y {
        return Ok(None);
    }
    Ok(Some(SolutionPair { n, k, x, y }))
}

/// Pairs `(⌊n^α⌋, ⌊k^α⌋)` solving the equation, for `n <= n_max`, in
/// increasing `n`, at most `cap` of them.
pub fn direct_solutions(
    eq: &PSEquation,
    alpha: &ExactScalar,
    n_max: u64,
    cap: Option<usize>,
    policy: &PrecisionPolicy,
) -> Result<Vec<SolutionPair>> {
    check_alpha(alpha)?;
    let runs: Vec<Result<Option<SolutionPair>>> = (1..=n_max)
        .into_par_iter()
        .map(|n| pair_at(eq, alpha, n, policy).map_err(|e| e.at(n)))
        .collect();
    let mut out = Vec::new();
    for run in runs {
        if let Some(p) = run? {
            out.push(p);
        }
    }
    if let Some(cap) = cap {
        out.truncate(cap);
    }
    Ok(out)
}

/// Whether `{n^α/a₂} ∈ [d/a₂, (d+1)/a₂)`.
fn fractional_condition(eq: &PSEquation, alpha: &ExactScalar, n: u64, policy: &PrecisionPolicy) -> Result<bool> {
    let band = HalfOpenInterval {
        lo: ExactScalar::from_rational(Rational::from((eq.d, eq.a2))),
        hi: ExactScalar::from_rational(Rational::from((eq.d + 1, eq.a2))),
    };
    if let Some(p) = exact_pow(n, alpha.value()) {
        let q = Rational::from((p, Integer::from(eq.a2)));
        let f = &q - Rational::from(q.floor_ref());
        return Ok(band.contains(&f));
    }
    policy.certify(format_args!("{{{n}^{alpha}/{}}}", eq.a2), |bits| {
        let f = pow_enclosure(n, alpha, bits)?.div_u64(eq.a2).frac()?;
        band.contains_enclosure(&f)
    })
}

/// Membership of `a⌊n^α⌋ + b` in `PS(α)` through the two-condition
/// equivalence: the fractional part of `n^α/a₂` lies in the residue band of
/// `d`, and `[(ax+b)^{1/α}, (ax+b+1)^{1/α})` contains an integer.
pub fn reduced_membership(eq: &PSEquation, alpha: &ExactScalar, n: u64, policy: &PrecisionPolicy) -> Result<bool> {
    check_alpha(alpha)?;
    let x = ps_value(n, alpha, policy)?;
    if eq.numerator(&x) <= 0 {
        return Err(Error::SkippedSmallN { n });
    }
    if !fractional_condition(eq, alpha, n, policy)? {
        return Ok(false);
    }
    let v = Rational::from((eq.numerator(&x), Integer::from(eq.a2)));
    let low = Integer::from(v.ceil_ref());
    let k = ceil_root(&low, alpha, policy)?;
    let high = v + 1u32;
    Ok(cmp_pow(k, alpha, &high, policy)? == Ordering::Less)
}

/// The direct test: `a⌊n^α⌋ + b` is an integer lying in `PS(α)`.
pub fn direct_membership(eq: &PSEquation, alpha: &ExactScalar, n: u64, policy: &PrecisionPolicy) -> Result<bool> {
    let x = ps_value(n, alpha, policy)?;
    match eq.image(&x) {
        Some(y) => is_member(&y, alpha, policy),
        None => Ok(false),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub alpha: ExactScalar,
    pub n_max: u64,
    pub checked: u64,
    pub skipped: u64,
    pub members: u64,
    /// `n` where the two tests disagree
    pub mismatches: Vec<u64>,
}

/// Runs the reduced and direct membership tests side by side for `n <= n_max`.
pub fn audit_reduction(
    eq: &PSEquation,
    alpha: &ExactScalar,
    n_max: u64,
    policy: &PrecisionPolicy,
) -> Result<AuditReport> {
    check_alpha(alpha)?;
    let runs: Vec<Result<Option<(bool, bool)>>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let reduced = match reduced_membership(eq, alpha, n, policy) {
                Err(Error::SkippedSmallN { .. }) => return Ok(None),
                other => other,
            };
            Ok(Some((reduced?, direct_membership(eq, alpha, n, policy)?)))
        })
        .collect();
    let mut report =
        AuditReport { alpha: alpha.clone(), n_max, checked: 0, skipped: 0, members: 0, mismatches: Vec::new() };
    for (i, run) in runs.into_iter().enumerate() {
        let n = i as u64 + 1;
        match run.map_err(|e| e.at(n))? {
            None => report.skipped += 1,
            Some((reduced, direct)) => {
                report.checked += 1;
                report.members += direct as u64;
                if reduced != direct {
                    report.mismatches.push(n);
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub alpha: ExactScalar,
    pub count: Option<usize>,
    pub first: Option<SolutionPair>,
    pub error: Option<String>,
}

/// Solution counts for each `α`. Ambiguity is recorded in its row and the
/// scan moves on.
pub fn solvability_scan(
    eq: &PSEquation,
    alphas: &[ExactScalar],
    n_max: u64,
    policy: &PrecisionPolicy,
) -> Result<Vec<ScanRow>> {
    alphas
        .iter()
        .map(|alpha| match direct_solutions(eq, alpha, n_max, None, policy) {
            Ok(pairs) => {
                Ok(ScanRow { alpha: alpha.clone(), count: Some(pairs.len()), first: pairs.into_iter().next(), error: None })
            }
            Err(e) if e.is_ambiguity() => {
                Ok(ScanRow { alpha: alpha.clone(), count: None, first: None, error: Some(e.to_string()) })
            }
            Err(e) => Err(e),
        })
        .collect()
}

/// Grid for sampled exponents: draws land on multiples of `10^-6`.
const ALPHA_GRID: u64 = 1_000_000;

/// `count` exponents drawn uniformly from `(lo, hi)`, one ChaCha stream per
/// index of the master seed.
pub fn sample_alphas(lo: &ExactScalar, hi: &ExactScalar, count: u64, seed: u64) -> Result<Vec<ExactScalar>> {
    if lo.value() >= hi.value() {
        return Err(Error::Precondition(format!("alpha range ({lo}, {hi}) is empty")));
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let k: u64 = rng.gen_range(1..ALPHA_GRID);
            let u = Rational::from((k, ALPHA_GRID));
            let alpha = lo.value() + Rational::from(hi.value() - lo.value()) * u;
            ExactScalar::from_rational_decimal(alpha)
        })
        .collect())
}

/// Reduced fractions `u/v` with `u, v <= height_bound` realized as `m/n`
/// with `m, n ∈ PS(α) ∩ [n_floor, ⌊n_max^α⌋]`, in increasing order.
pub fn quotient_set(
    alpha: &ExactScalar,
    n_floor: u64,
    n_max: u64,
    height_bound: u64,
    policy: &PrecisionPolicy,
) -> Result<Vec<Rational>> {
    check_alpha(alpha)?;
    if height_bound == 0 {
        return Err(Error::Precondition("height bound must be positive".into()));
    }
    if n_max < n_floor {
        return Err(Error::Precondition(format!("n_max = {n_max} is below N_floor = {n_floor}")));
    }
    let values: Vec<Result<Integer>> =
        (1..=n_max).into_par_iter().map(|k| ps_value(k, alpha, policy).map_err(|e| e.at(k))).collect();
    let mut members = HashSet::new();
    for v in values {
        let v = v?;
        if v >= n_floor {
            members.insert(v);
        }
    }
    let mut ratios: Vec<(u64, u64)> = (1..=height_bound)
        .flat_map(|u| (1..=height_bound).map(move |v| (u, v)))
        .filter(|&(u, v)| gcd(u, v) == 1)
        .collect();
    ratios.retain(|&(u, v)| {
        members.iter().any(|m| m.is_divisible_u(v as u32) && members.contains(&(Integer::from(m / v) * u)))
    });
    let mut out: Vec<Rational> = ratios.into_iter().map(|(u, v)| Rational::from((u, v))).collect();
    out.sort();
    Ok(out)
}

/// The shifted system at a single θ with its own exponent `t = t_a(θ)`:
/// `‖nθ + κθ/(t n^{t−1})‖ <= c/n^{t−1}` and `{γ n^t} ∈ I`.
#[derive(Clone, Debug)]
pub struct ShiftedSystem {
    pub a: ExactScalar,
    pub kappa: ExactScalar,
    pub c: ExactScalar,
    pub gamma: ExactScalar,
    pub i: HalfOpenInterval,
}

impl ShiftedSystem {
    pub fn new(
        a: ExactScalar,
        kappa: ExactScalar,
        c: ExactScalar,
        gamma: ExactScalar,
        i: HalfOpenInterval,
    ) -> Result<Self> {
        if *a.value() <= 0 || *a.value() >= 1 {
            return Err(Error::Precondition(format!("a = {a} is not in (0,1)")));
        }
        if !c.is_positive() {
            return Err(Error::Precondition(format!("c = {c} must be positive")));
        }
        if *gamma.value() == 0 {
            return Err(Error::Precondition("gamma must be nonzero".into()));
        }
        i.validate_unit()?;
        Ok(ShiftedSystem { a, kappa, c, gamma, i })
    }

    fn eval_at(&self, theta: &ExactScalar, n: u64, bits: u32) -> Result<SolutionRecord> {
        let t = t_map(&self.a, theta, bits)?;
        // θ^k = a makes every power below an exact integer
        let t_int = t.is_point().then(|| t.lo().to_integer()).flatten().and_then(|k| k.to_u32());
        let th = theta.value();
        let (residual, psi, first) = match t_int {
            Some(k) => {
                let damp = Integer::from(n).pow(k - 1);
                let shift = Rational::from(self.kappa.value() * th) / Integer::from(&damp * k);
                let r = dist_rational(&(Rational::from(th * n) + shift));
                let p = Rational::from(self.c.value() / damp);
                let first = r <= p;
                (BigReal::from_rational(&r, bits), BigReal::from_rational(&p, bits), first)
            }
            None => {
                let one = BigReal::from_u64(1, bits);
                let ln_n = BigReal::from_u64(n, bits).ln()?;
                let damp = t.sub(&one).mul(&ln_n).exp();
                let th_enc = theta.enclose(bits);
                let shift = self.kappa.enclose(bits).mul(&th_enc).div(&t.mul(&damp))?;
                let r = th_enc.mul_u64(n).add(&shift).dist_nearest_int();
                let p = self.c.enclose(bits).div(&damp)?;
                let first = r.le(&p)?;
                (r, p, first)
            }
        };
        if self.i.is_full() || !first {
            return Ok(SolutionRecord { n, residual, psi, twist: None, passed: first });
        }
        let (twist, inside) = match t_int {
            Some(k) => {
                let q = Rational::from(self.gamma.value() * Integer::from(n).pow(k));
                let f = &q - Rational::from(q.floor_ref());
                let inside = self.i.contains(&f);
                (BigReal::from_rational(&f, bits), inside)
            }
            None => {
                let ln_n = BigReal::from_u64(n, bits).ln()?;
                let f = self.gamma.enclose(bits).mul(&t.mul(&ln_n).exp()).frac()?;
                let inside = self.i.contains_enclosure(&f)?;
                (f, inside)
            }
        };
        Ok(SolutionRecord { n, residual, psi, twist: Some(twist), passed: inside })
    }

    /// Certified record at one `(θ, n)`.
    pub fn eval(&self, theta: &ExactScalar, n: u64, policy: &PrecisionPolicy) -> Result<SolutionRecord> {
        if n == 0 {
            return Err(Error::Domain("n must be >= 1".into()));
        }
        policy.certify(format_args!("shifted system at n = {n}"), |bits| self.eval_at(theta, n, bits)).map_err(|e| e.at(n))
    }
}

fn dist_rational(x: &Rational) -> Rational {
    let f = x - Rational::from(x.floor_ref());
    let g = Rational::from(1 - &f);
    if g < f {
        g
    } else {
        f
    }
}

/// Passing `n ∈ [n0, n1]` of the shifted system at θ, increasing.
pub fn solve_ps_theta(
    sys: &ShiftedSystem,
    theta: &ExactScalar,
    n0: u64,
    n1: u64,
    policy: &PrecisionPolicy,
) -> Result<Vec<SolutionRecord>> {
    if theta.value() <= sys.a.value() || *theta.value() >= 1 {
        return Err(Error::Precondition(format!("theta = {theta} is not in ({}, 1)", sys.a)));
    }
    if n0 == 0 || n0 > n1 {
        return Err(Error::Precondition(format!("bad n range {n0}..{n1}")));
    }
    let runs: Vec<Result<SolutionRecord>> = (n0..=n1).into_par_iter().map(|n| sys.eval(theta, n, policy)).collect();
    let mut out = Vec::new();
    for run in runs {
        let rec = run?;
        if rec.passed {
            out.push(rec);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub t_lo: BigReal,
    pub t_hi: BigReal,
    /// `t_a(j₂) − t_a(j₁) < 2 − t_a(j₂)`; `None` if undecided at the cap
    pub interval_quality: Option<bool>,
    pub warning: Option<String>,
}

/// The fixed-exponent instance on `J ⊂ (a, √a)` whose accuracy
/// `min(c, 1/10)/n^{t_a(j₂)−1}` is below the θ-dependent one everywhere on `J`.
pub fn worst_case_instance(
    sys: &ShiftedSystem,
    j: &OpenInterval,
    policy: &PrecisionPolicy,
) -> Result<(SystemInstance, WorstCaseReport)> {
    j.validate()?;
    let a = sys.a.value();
    if j.lo.value() <= a || Rational::from(j.hi.value() * j.hi.value()) >= *a {
        return Err(Error::ClosureViolation(format!("closure of J = {j} is not inside (a, sqrt(a)) for a = {}", sys.a)));
    }
    let quality = policy.certify("interval quality", |bits| {
        let lo = t_map(&sys.a, &j.lo, bits)?;
        let hi = t_map(&sys.a, &j.hi, bits)?;
        let two = BigReal::from_u64(2, bits);
        let holds = hi.sub(&lo).cmp_certain(&two.sub(&hi)).ok_or(Error::Unresolved)? == Ordering::Less;
        Ok((lo, hi, holds))
    });
    let bits = policy.start_bits;
    let (t_lo, t_hi, interval_quality) = match quality {
        Ok((lo, hi, holds)) => (lo, hi, Some(holds)),
        Err(e) if e.is_ambiguity() => (t_map(&sys.a, &j.lo, bits)?, t_map(&sys.a, &j.hi, bits)?, None),
        Err(e) => Err(e)?,
    };
    let warning = match interval_quality {
        Some(true) => None,
        Some(false) => Some(format!("t_a(j2) - t_a(j1) < 2 - t_a(j2) fails on J = {j}")),
        None => Some("interval quality undecided at maximum precision".into()),
    };
    let sigma = RealExpr::from_node(Node::Sub(
        Box::new(Node::TMap(Box::new(Node::Num(sys.a.clone())), Box::new(Node::Num(j.hi.clone())))),
        Box::new(Node::num(Rational::from(1))),
    ));
    let inst = SystemInstance::new(
        j.clone(),
        PsiFamily::power_law(sys.c.clone(), sigma)?,
        PerturbationFamily::PsShift { a: sys.a.clone(), kappa: sys.kappa.clone() },
        TwistFamily::PowerPhase {
            gamma: sys.gamma.clone(),
            exponent: TwistExponent::ThetaDependent { a: sys.a.clone() },
        },
        sys.i.clone(),
    )?;
    Ok((inst, WorstCaseReport { t_lo, t_hi, interval_quality, warning }))
}

/// Lossy `t_a(x)` for reports.
pub fn t_value(a: &ExactScalar, x: &ExactScalar) -> Result<f64> {
    Ok(t_map(a, x, numeric::DEFAULT_START_BITS)?.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::solve_system;

    fn s(x: &str) -> ExactScalar {
        x.parse().unwrap()
    }

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    fn xy(pairs: &[SolutionPair]) -> Vec<(u64, u64)> {
        pairs.iter().map(|p| (p.x.to_u64().unwrap(), p.y.to_u64().unwrap())).collect()
    }

    #[test]
    fn values_and_membership() {
        assert_eq!(ps_value(5, &s("2"), &pol()).unwrap(), 25);
        assert_eq!(ps_value(7, &s("3/2"), &pol()).unwrap(), 18);
        assert_eq!(ps_value(2, &s("3/2"), &pol()).unwrap(), 2);
        assert!(is_member(&Integer::from(25), &s("2"), &pol()).unwrap());
        assert!(is_member(&Integer::from(18), &s("3/2"), &pol()).unwrap());
        assert!(!is_member(&Integer::from(4), &s("3/2"), &pol()).unwrap());
    }

    #[test]
    fn equation_residue() {
        assert_eq!(make_equation(1, 2, 0).unwrap().d, 0);
        assert_eq!(make_equation(1, 3, 1).unwrap().d, 2);
        assert!(matches!(make_equation(2, 4, 1), Err(Error::NotCoprime { .. })));
        let (o, swapped) = orient(&make_equation(3, 2, 1).unwrap()).unwrap();
        assert!(swapped);
        assert_eq!((o.a1, o.a2, o.b2), (2, 3, -1));
        assert_eq!(first_natural_solution(&make_equation(1, 3, 1).unwrap()), (2, 1));
    }

    #[test]
    fn direct_solutions_pinned() {
        let eq = make_equation(1, 2, 0).unwrap();
        let got = direct_solutions(&eq, &s("3/2"), 30, None, &pol()).unwrap();
        assert_eq!(xy(&got), vec![(2, 1), (22, 11), (36, 18), (82, 41), (140, 70), (164, 82)]);
        for p in &got {
            assert_eq!(Rational::from(p.y.clone()), eq.a() * p.x.clone() + eq.b());
        }
        assert!(direct_solutions(&eq, &s("5/2"), 100, None, &pol()).unwrap().is_empty());
        assert!(direct_solutions(&eq, &s("2"), 10, None, &pol()).unwrap().is_empty());
        assert_eq!(direct_solutions(&eq, &s("3/2"), 30, Some(2), &pol()).unwrap().len(), 2);
    }

    #[test]
    fn reduced_membership_examples() {
        let eq = make_equation(1, 2, 0).unwrap();
        assert!(reduced_membership(&eq, &s("3/2"), 2, &pol()).unwrap());
        assert!(!reduced_membership(&eq, &s("3/2"), 3, &pol()).unwrap());
        let neg = make_equation(1, 2, -10).unwrap();
        assert!(matches!(reduced_membership(&neg, &s("3/2"), 2, &pol()), Err(Error::SkippedSmallN { n: 2 })));
        let audit = audit_reduction(&make_equation(1, 3, 1).unwrap(), &s("1.6"), 2000, &pol()).unwrap();
        assert!(audit.mismatches.is_empty());
        assert!(audit.members > 0);
    }

    #[test]
    fn scans_pinned() {
        let eq = make_equation(1, 2, 0).unwrap();
        let rows = solvability_scan(&eq, &[s("1.5"), s("2.5")], 10_000, &pol()).unwrap();
        assert_eq!(rows.iter().map(|r| r.count.unwrap()).collect::<Vec<_>>(), vec![82, 0]);
        assert!(solvability_scan(&eq, &[], 10, &pol()).unwrap().is_empty());
        let rows = solvability_scan(&make_equation(1, 3, 1).unwrap(), &[s("1.6")], 10_000, &pol()).unwrap();
        assert_eq!(rows[0].count, Some(19));
        let first = rows[0].first.as_ref().unwrap();
        assert_eq!((first.n, first.k, first.x.to_u64().unwrap(), first.y.to_u64().unwrap()), (139, 70, 2684, 895));
    }

    #[test]
    fn alpha_samples_are_seeded() {
        let a = sample_alphas(&s("1.2"), &s("1.9"), 5, 7).unwrap();
        let b = sample_alphas(&s("1.2"), &s("1.9"), 8, 7).unwrap();
        assert_eq!(a[..], b[..5]);
        assert!(a.iter().all(|x| *x.value() > Rational::from((6, 5)) && *x.value() < Rational::from((19, 10))));
        assert_ne!(a, sample_alphas(&s("1.2"), &s("1.9"), 5, 8).unwrap());
    }

    #[test]
    fn quotient_sets_pinned() {
        let r = |u: i64, v: i64| Rational::from((u, v));
        assert_eq!(quotient_set(&s("3/2"), 1, 30, 2, &pol()).unwrap(), vec![r(1, 2), r(1, 1), r(2, 1)]);
        assert_eq!(quotient_set(&s("3/2"), 1, 30, 1, &pol()).unwrap(), vec![r(1, 1)]);
        // 13584 = ⌊45^{5/2}⌋ = 3·⌊29^{5/2}⌋
        assert_eq!(quotient_set(&s("5/2"), 100, 200, 3, &pol()).unwrap(), vec![r(1, 3), r(1, 1), r(3, 1)]);
        let high = quotient_set(&s("3/2"), 50, 200, 3, &pol()).unwrap();
        let low = quotient_set(&s("3/2"), 10, 200, 3, &pol()).unwrap();
        assert!(high.iter().all(|q| low.contains(q)));
    }

    fn shifted(kappa: &str, i: HalfOpenInterval) -> Result<ShiftedSystem> {
        ShiftedSystem::new(s("1/4"), s(kappa), s("0.1"), s("1"), i)
    }

    #[test]
    fn shifted_system_at_theta() {
        let sys = shifted("0", HalfOpenInterval::full()).unwrap();
        let got = solve_ps_theta(&sys, &s("1/2"), 1, 20, &pol()).unwrap();
        assert_eq!(got.iter().map(|r| r.n).collect::<Vec<_>>(), (1..=10).map(|k| 2 * k).collect::<Vec<_>>());
        assert!(matches!(shifted("0", HalfOpenInterval { lo: s("0.0"), hi: s("0.0") }), Err(Error::Precondition(_))));
        let sys = shifted("1", HalfOpenInterval::unit(s("0"), s("1/2")).unwrap()).unwrap();
        let got = solve_ps_theta(&sys, &s("0.42"), 1, 100_000, &pol()).unwrap();
        assert_eq!(got.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 7, 69]);
        assert!(solve_ps_theta(&sys, &s("0.2"), 1, 10, &pol()).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let sys = shifted("1", HalfOpenInterval::unit(s("0"), s("1/2")).unwrap()).unwrap();
        let j = |lo: &str, hi: &str| OpenInterval::new(s(lo), s(hi)).unwrap();
        let (inst, report) = worst_case_instance(&sys, &j("0.30", "0.32"), &pol()).unwrap();
        let PsiFamily::PowerLaw { sigma, .. } = &inst.psi else { panic!() };
        assert!((sigma.to_f64() - 0.2166509).abs() < 1e-6);
        assert_eq!(report.interval_quality, Some(true));
        assert!(matches!(worst_case_instance(&sys, &j("0.3", "0.6"), &pol()), Err(Error::ClosureViolation(_))));
        let (_, report) = worst_case_instance(&sys, &j("0.30", "0.45"), &pol()).unwrap();
        assert_eq!(report.interval_quality, Some(false));
        assert!(report.warning.is_some());
        assert!((report.t_lo.to_f64() - 1.1514).abs() < 1e-4 && (report.t_hi.to_f64() - 1.7361).abs() < 1e-3);
    }

    #[test]
    fn worst_case_solutions_solve_the_shifted_system() {
        let sys = shifted("1", HalfOpenInterval::unit(s("0"), s("1/2")).unwrap()).unwrap();
        let j = OpenInterval::new(s("0.30"), s("0.32")).unwrap();
        let (inst, _) = worst_case_instance(&sys, &j, &pol()).unwrap();
        for theta in ["0.301", "0.305", "0.31", "0.3125", "0.319"] {
            let th = s(theta);
            let worst = solve_system(&inst, &th, 1, 3000, usize::MAX, Default::default(), &pol()).unwrap();
            for rec in worst {
                assert!(sys.eval(&th, rec.n, &pol()).unwrap().passed, "theta {theta} n {}", rec.n);
            }
        }
    }
}
