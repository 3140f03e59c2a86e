use std::cmp::Ordering;
use std::collections::BTreeMap;

use rug::Rational;
use serde::Serialize;

use super::{PerturbationFamily, PsiFamily, SystemInstance, TwistExponent, TwistFamily};
use crate::error::{Error, Result};
use crate::numeric::{is_prime, rational_to_f64, BigReal, ExactScalar, Node, PrecisionPolicy, RealExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsAnalytically,
    HoldsOnTruncation,
    Fails,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub note: String,
    pub diagnostics: BTreeMap<String, f64>,
}

impl ConditionReport {
    fn new(verdict: Verdict, note: impl Into<String>) -> Self {
        ConditionReport { verdict, note: note.into(), diagnostics: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub n_trunc: u64,
    /// keyed by condition name: A1 … A4, B1 … B4, C2
    pub conditions: BTreeMap<String, ConditionReport>,
}

impl HypothesisReport {
    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.conditions.get(name).map(|c| c.verdict)
    }
}

/// Ladder cap for the sign decisions made here; these are classifications,
/// not certified counts, so a modest cap keeps the checker quick.
const CLASSIFY_CAP_BITS: u32 = 1024;

/// Sign of a real given by a precision-indexed enclosure; `None` if
/// undecided at the cap.
fn sign(f: impl Fn(u32) -> Result<BigReal>) -> Option<Ordering> {
    let policy = PrecisionPolicy::with_cap(CLASSIFY_CAP_BITS);
    let zero = Rational::new();
    policy
        .certify("sign", |bits| f(bits)?.cmp_rational(&zero).ok_or(Error::Unresolved))
        .ok()
}

/// Decay rate of `ψ_n`: `ψ_n ≍ n^{-s}`.
#[derive(Clone, Debug)]
enum PsiRate {
    Power(RealExpr),
    Unknown,
}

fn psi_rate(psi: &PsiFamily) -> PsiRate {
    match psi {
        PsiFamily::PowerLaw { sigma, .. } => PsiRate::Power(sigma.clone()),
        PsiFamily::ConstantBelowTenth { .. } => PsiRate::Power(RealExpr::rational(Rational::new())),
        PsiFamily::Table { .. } => PsiRate::Unknown,
    }
}

/// Decay rate of `‖φ_n′‖`: `≍ n^{-β}`, possibly with a log factor.
#[derive(Clone, Debug)]
enum DerivRate {
    Vanishing,
    Power(RealExpr),
    Unknown(String),
}

fn closure_inside(inst: &SystemInstance, a: &ExactScalar) -> bool {
    inst.j.lo.value() > a.value() && *inst.j.hi.value() < 1
}

fn tmap_node(a: &ExactScalar, x: &ExactScalar) -> Node {
    Node::TMap(Box::new(Node::Num(a.clone())), Box::new(Node::Num(x.clone())))
}

fn minus_one(n: Node) -> Node {
    Node::Sub(Box::new(n), Box::new(Node::num(Rational::from(1))))
}

fn deriv_rate(inst: &SystemInstance) -> DerivRate {
    match &inst.phi {
        PerturbationFamily::Zero => DerivRate::Vanishing,
        PerturbationFamily::PsShift { kappa, .. } if *kappa.value() == 0 => DerivRate::Vanishing,
        PerturbationFamily::Sinusoid { kappa, delta } => {
            DerivRate::Power(RealExpr::rational(Rational::from(delta.value() - kappa.value())))
        }
        PerturbationFamily::PsShift { a, .. } => {
            if closure_inside(inst, a) {
                DerivRate::Power(RealExpr::from_node(minus_one(tmap_node(a, &inst.j.lo))))
            } else {
                DerivRate::Unknown(format!("closure of J is not inside (a, 1) = ({a}, 1)"))
            }
        }
    }
}

/// Sign of `x - y` for expression-valued reals.
fn cmp_expr(x: &RealExpr, y: &RealExpr) -> Option<Ordering> {
    if let (Some(a), Some(b)) = (x.as_rational(), y.as_rational()) {
        return Some(a.cmp(b));
    }
    if x.node() == y.node() {
        return Some(Ordering::Equal);
    }
    sign(|bits| Ok(x.enclose(bits)?.sub(&y.enclose(bits)?)))
}

fn lin(a: i64, s: &RealExpr, b: i64) -> RealExpr {
    // a*s + b
    RealExpr::from_node(Node::Add(
        Box::new(Node::Mul(Box::new(Node::num(Rational::from(a))), Box::new(s.node().clone()))),
        Box::new(Node::num(Rational::from(b))),
    ))
}

fn zero() -> RealExpr {
    RealExpr::rational(Rational::new())
}

struct Truncation {
    n: u64,
    psi: Vec<f64>,
    exact: Vec<Option<Rational>>,
}

impl Truncation {
    fn build(psi: &PsiFamily, n_trunc: u64) -> Result<Self> {
        let n = psi.len().map_or(n_trunc, |l| l.min(n_trunc));
        let mut vals = Vec::with_capacity(n as usize);
        let mut exact = Vec::with_capacity(n as usize);
        for k in 1..=n {
            let e = psi.exact(k)?;
            vals.push(match &e {
                Some(q) => rational_to_f64(q),
                None => psi.approx(k)?,
            });
            exact.push(e);
        }
        Ok(Truncation { n, psi: vals, exact })
    }

    fn at(&self, k: u64) -> f64 {
        self.psi[(k - 1) as usize]
    }

    /// First `k` with `ψ_{k+1}/(k+1) > ψ_k/k`.
    fn a2_breakpoint(&self) -> Option<u64> {
        (1..self.n).find(|&k| match (&self.exact[(k - 1) as usize], &self.exact[k as usize]) {
            (Some(a), Some(b)) => Rational::from(b / (k + 1)) > Rational::from(a / k),
            _ => self.at(k + 1) / (k + 1) as f64 > self.at(k) / k as f64,
        })
    }

    fn a1_partial_sup(&self) -> f64 {
        let mut best = 0.0f64;
        for k in 1..=self.n / 2 {
            let mut sum = 0.0;
            let mut l = 1u64;
            while k << l <= self.n {
                sum += self.at(k << l) * (l * l) as f64 / self.at(k);
                l += 1;
            }
            best = best.max(sum);
        }
        best
    }

    fn a3_max_ratio(&self) -> f64 {
        (1..=self.n / 2).map(|k| self.at(k) / self.at(2 * k)).fold(0.0, f64::max)
    }

    fn prime_sum(&self) -> f64 {
        (2..=self.n).filter(|&p| is_prime(p)).map(|p| self.at(p)).sum()
    }
}

fn a_conditions(inst: &SystemInstance, tr: &Truncation) -> Vec<(&'static str, ConditionReport)> {
    let a1_sup = tr.a1_partial_sup();
    let a3_ratio = tr.a3_max_ratio();
    let a4_sum = tr.prime_sum();
    let n = tr.n as f64;
    match psi_rate(&inst.psi) {
        PsiRate::Power(s) => {
            let s_pos = cmp_expr(&s, &zero());
            let a1 = match s_pos {
                Some(Ordering::Greater) => ConditionReport::new(Verdict::HoldsAnalytically, "sum of 2^{-l sigma} l^2 converges for sigma > 0"),
                Some(_) => ConditionReport::new(Verdict::Fails, "sum of 2^{-l sigma} l^2 diverges for sigma <= 0"),
                None => ConditionReport::new(Verdict::Indeterminate, "sign of sigma undecided"),
            };
            let a2 = match cmp_expr(&s, &RealExpr::rational(Rational::from(-1))) {
                Some(Ordering::Less) => ConditionReport::new(Verdict::Fails, "psi_n/n increases for sigma < -1"),
                Some(_) => ConditionReport::new(Verdict::HoldsAnalytically, "psi_n/n = c n^{-sigma-1} is non-increasing"),
                None => ConditionReport::new(Verdict::Indeterminate, "sigma + 1 undecided"),
            };
            let c_min = s.enclose(64).map(|b| 2f64.powf(b.to_f64())).unwrap_or(f64::NAN);
            let a3 = ConditionReport::new(Verdict::HoldsAnalytically, "psi_n / psi_2n = 2^sigma; any c > max(2^sigma, 1) works")
                .with("inferred_c", c_min.max(1.0));
            let a4 = match cmp_expr(&s, &RealExpr::rational(Rational::from(1))) {
                Some(Ordering::Greater) => ConditionReport::new(Verdict::Fails, "sum over primes of p^{-sigma} converges for sigma > 1"),
                Some(_) => ConditionReport::new(Verdict::HoldsAnalytically, "sum over primes of p^{-sigma} diverges for sigma <= 1"),
                None => ConditionReport::new(Verdict::Indeterminate, "sigma - 1 undecided"),
            };
            vec![
                ("A1", a1.with("partial_sup", a1_sup).with("n_trunc", n)),
                ("A2", a2),
                ("A3", a3.with("max_ratio_on_truncation", a3_ratio)),
                ("A4", a4.with("partial_prime_sum", a4_sum).with("n_trunc", n)),
            ]
        }
        PsiRate::Unknown => {
            let a2 = match tr.a2_breakpoint() {
                Some(k) => ConditionReport::new(Verdict::Fails, "psi_n/n increases on the table").with("breakpoint", k as f64),
                None => ConditionReport::new(Verdict::HoldsOnTruncation, "psi_n/n non-increasing on the table"),
            };
            vec![
                (
                    "A1",
                    ConditionReport::new(Verdict::Indeterminate, "a limit statement; only the truncated supremum is reported")
                        .with("partial_sup", a1_sup)
                        .with("n_trunc", n),
                ),
                ("A2", a2.with("n_trunc", n)),
                (
                    "A3",
                    ConditionReport::new(Verdict::HoldsOnTruncation, "any c above the largest observed ratio works on the table")
                        .with("inferred_c", a3_ratio.max(1.0))
                        .with("max_ratio_on_truncation", a3_ratio),
                ),
                (
                    "A4",
                    ConditionReport::new(Verdict::Indeterminate, "divergence cannot be decided from a finite table")
                        .with("partial_prime_sum", a4_sum)
                        .with("n_trunc", n),
                ),
            ]
        }
    }
}

fn b1(inst: &SystemInstance) -> ConditionReport {
    match &inst.phi {
        PerturbationFamily::Zero => ConditionReport::new(Verdict::HoldsAnalytically, "phi = 0"),
        PerturbationFamily::Sinusoid { kappa, delta } => {
            // sup |φ_n| ≍ n^{-δ} for κ >= 0 and n^{κ-δ} for κ < 0
            let growth = if *kappa.value() >= 0 {
                Rational::from(-delta.value())
            } else {
                Rational::from(kappa.value() - delta.value())
            };
            if growth <= 0 {
                ConditionReport::new(Verdict::HoldsAnalytically, "sup |phi_n| stays bounded")
            } else {
                ConditionReport::new(Verdict::Fails, "sup |phi_n| grows like a positive power of n")
            }
            .with("growth_exponent", growth.to_f64())
        }
        PerturbationFamily::PsShift { a, .. } => {
            if closure_inside(inst, a) {
                ConditionReport::new(Verdict::HoldsAnalytically, "t_a > 1 on the closure of J, so n^{1-t_a} <= 1")
            } else {
                ConditionReport::new(Verdict::Indeterminate, "closure of J is not inside (a, 1)")
            }
        }
    }
}

fn b_conditions(inst: &SystemInstance, tr: &Truncation) -> Vec<(&'static str, ConditionReport)> {
    let rate = deriv_rate(inst);
    let psi = psi_rate(&inst.psi);
    let beta_diag = match &rate {
        DerivRate::Power(b) => Some(b.to_f64()),
        _ => None,
    };
    let log_factor = matches!(inst.phi, PerturbationFamily::PsShift { .. });

    let b2 = match &rate {
        DerivRate::Vanishing => ConditionReport::new(Verdict::HoldsAnalytically, "phi' = 0"),
        DerivRate::Unknown(why) => ConditionReport::new(Verdict::Indeterminate, why.clone()),
        DerivRate::Power(beta) => match cmp_expr(beta, &zero()) {
            Some(Ordering::Less) => ConditionReport::new(Verdict::Fails, "sup |phi_n'| grows like a positive power of n"),
            Some(_) => ConditionReport::new(Verdict::HoldsAnalytically, "sup |phi_n'| is eventually non-increasing"),
            None => ConditionReport::new(Verdict::Indeterminate, "decay exponent undecided"),
        },
    };

    // B3: s < 1 and β > 2s − 1;  B4: β > s − 1 (strict: boundary cases carry a
    // log factor or a constant ratio)
    let (b3, b4) = match (&psi, &rate) {
        (PsiRate::Unknown, _) => (
            ConditionReport::new(Verdict::Indeterminate, "psi is a finite table"),
            ConditionReport::new(Verdict::Indeterminate, "psi is a finite table"),
        ),
        (_, DerivRate::Unknown(why)) => (
            ConditionReport::new(Verdict::Indeterminate, why.clone()),
            ConditionReport::new(Verdict::Indeterminate, why.clone()),
        ),
        (PsiRate::Power(s), rate) => {
            let s_lt_1 = cmp_expr(s, &RealExpr::rational(Rational::from(1)));
            let (beta_vs_3, beta_vs_4) = match rate {
                DerivRate::Vanishing => (Some(Ordering::Greater), Some(Ordering::Greater)),
                DerivRate::Power(beta) => (cmp_expr(beta, &lin(2, s, -1)), cmp_expr(beta, &lin(1, s, -1))),
                DerivRate::Unknown(_) => unreachable!(),
            };
            let b3 = match (s_lt_1, beta_vs_3) {
                (Some(Ordering::Less), Some(Ordering::Greater)) => {
                    ConditionReport::new(Verdict::HoldsAnalytically, "s < 1 and beta > 2s - 1")
                }
                (Some(Ordering::Equal | Ordering::Greater), _) => {
                    ConditionReport::new(Verdict::Fails, "sigma >= 1: the denominator grows too slowly")
                }
                (_, Some(Ordering::Less | Ordering::Equal)) => {
                    ConditionReport::new(Verdict::Fails, "beta <= 2 sigma - 1")
                }
                _ => ConditionReport::new(Verdict::Indeterminate, "exponent comparison undecided"),
            };
            let b4 = match beta_vs_4 {
                Some(Ordering::Greater) => ConditionReport::new(Verdict::HoldsAnalytically, "beta > sigma - 1"),
                Some(_) => ConditionReport::new(Verdict::Fails, "beta <= sigma - 1"),
                None => ConditionReport::new(Verdict::Indeterminate, "exponent comparison undecided"),
            };
            (b3, b4)
        }
    };

    let mut b3 = b3;
    if let Some(r) = b3_ratio(inst, tr) {
        b3 = b3.with("ratio_on_truncation", r);
    }
    let mut out = vec![("B1", b1(inst)), ("B2", b2), ("B3", b3), ("B4", b4)];
    for (_, c) in out.iter_mut().skip(1) {
        if let Some(b) = beta_diag {
            c.diagnostics.insert("beta".into(), b);
        }
        if log_factor {
            c.diagnostics.insert("log_factor".into(), 1.0);
        }
    }
    out
}

/// `Σ max(ψ_p, ‖φ_p′‖)(log p)² / (Σ ψ_p)²` over primes up to the truncation.
fn b3_ratio(inst: &SystemInstance, tr: &Truncation) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for p in (2..=tr.n).filter(|&p| is_prime(p)) {
        let d = inst.phi.sup_abs_derivative(p, &inst.j, 64).ok()?.to_f64();
        let lp = (p as f64).ln();
        num += tr.at(p).max(d) * lp * lp;
        den += tr.at(p);
    }
    (den > 0.0).then(|| num / (den * den))
}

fn c2(inst: &SystemInstance) -> ConditionReport {
    match &inst.rho {
        TwistFamily::None => ConditionReport::new(Verdict::HoldsAnalytically, "no twist"),
        TwistFamily::PowerPhase { exponent: TwistExponent::Fixed { .. }, .. } => {
            ConditionReport::new(Verdict::HoldsAnalytically, "rho_n does not depend on theta")
        }
        TwistFamily::PowerPhase { exponent: TwistExponent::ThetaDependent { a }, .. } => {
            if !closure_inside(inst, a) {
                return ConditionReport::new(Verdict::Indeterminate, "closure of J is not inside (a, 1)");
            }
            // sup over J' of |ρ_n'| ≍ n^{t_a(j2')} log n with t_a(j2') < t_a(j2)
            let worst = RealExpr::from_node(minus_one(tmap_node(a, &inst.j.hi)));
            let diag = worst.to_f64();
            match psi_rate(&inst.psi) {
                PsiRate::Unknown => ConditionReport::new(Verdict::Indeterminate, "psi is a finite table"),
                PsiRate::Power(s) => match cmp_expr(&worst, &s) {
                    Some(Ordering::Greater) => ConditionReport::new(Verdict::Fails, "t_a(j2) - 1 > sigma"),
                    Some(_) => ConditionReport::new(Verdict::HoldsAnalytically, "t_a(j2') - 1 < t_a(j2) - 1 <= sigma for every proper J'"),
                    None => ConditionReport::new(Verdict::Indeterminate, "t_a(j2) - 1 vs sigma undecided"),
                },
            }
            .with("t_a_j2_minus_1", diag)
        }
    }
}

/// Classifies the growth and regularity hypotheses of an instance. (C1) is an
/// equidistribution statement and is left to the `weyl` module.
pub fn check_hypotheses(inst: &SystemInstance, n_trunc: u64) -> Result<HypothesisReport> {
    if n_trunc < 100 {
        return Err(Error::Precondition(format!("N_trunc = {n_trunc} must be at least 100")));
    }
    inst.validate()?;
    let tr = Truncation::build(&inst.psi, n_trunc)?;
    let mut conditions = BTreeMap::new();
    for (k, v) in a_conditions(inst, &tr).into_iter().chain(b_conditions(inst, &tr)) {
        conditions.insert(k.to_string(), v);
    }
    conditions.insert("C2".to_string(), c2(inst));
    Ok(HypothesisReport { n_trunc: tr.n, conditions })
}
