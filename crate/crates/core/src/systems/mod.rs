//! The perturbed, twisted approximation system
//!
//! ```text
//! ‖nθ + φ_n(θ)‖ <= ψ_n,   {ρ_n(θ)} ∈ I
//! ```
//!
//! with certified evaluation, hypothesis classification and a seeded
//! estimator for the measure of the solvable set.

mod families;
mod hypotheses;
mod survey;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

pub use families::{subdivide, PerturbationFamily, PsiFamily, TwistExponent, TwistFamily, SUP_PIECES};
pub use hypotheses::{check_hypotheses, ConditionReport, HypothesisReport, Verdict};
pub use survey::{sample_theta, survey_measure, SampleOutcome, SurveyOptions, SurveyReport};

use crate::error::{Error, Result};
use crate::interval::{HalfOpenInterval, OpenInterval};
use crate::numeric::{is_prime, t_map_enclosure, BigReal, ExactScalar, PrecisionPolicy};

/// A full description of the system, with θ supplied per query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemInstance {
    #[serde(rename = "J")]
    pub j: OpenInterval,
    pub psi: PsiFamily,
    pub phi: PerturbationFamily,
    pub rho: TwistFamily,
    #[serde(rename = "I")]
    pub i: HalfOpenInterval,
}

impl SystemInstance {
    pub fn new(
        j: OpenInterval,
        psi: PsiFamily,
        phi: PerturbationFamily,
        rho: TwistFamily,
        i: HalfOpenInterval,
    ) -> Result<Self> {
        let out = SystemInstance { j, psi, phi, rho, i };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.j.validate()?;
        self.i.validate_unit()?;
        self.psi.validate()?;
        self.phi.validate()?;
        self.rho.validate()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let out: SystemInstance = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub n: u64,
    /// `‖nθ + φ_n(θ)‖`
    pub residual: BigReal,
    pub psi: BigReal,
    /// `{ρ_n(θ)}`, absent without a twist or when not needed for the verdict.
    pub twist: Option<BigReal>,
    pub passed: bool,
}

/// Precomputed `ψ_n` enclosures for `n <= n_max`, shared across many θ.
#[derive(Clone, Debug)]
pub struct PsiCache {
    bits: u32,
    values: Vec<(BigReal, Option<Rational>)>,
}

impl PsiCache {
    pub fn build(psi: &PsiFamily, n_max: u64, bits: u32) -> Result<Self> {
        let top = psi.len().map_or(n_max, |l| l.min(n_max));
        let values = (1..=top)
            .into_par_iter()
            .map(|n| {
                let exact = psi.exact(n)?;
                let enc = match &exact {
                    Some(q) => BigReal::from_rational(q, bits),
                    None => psi.enclose(n, bits)?,
                };
                Ok((enc, exact))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PsiCache { bits, values })
    }

    fn get(&self, n: u64, bits: u32) -> Option<&(BigReal, Option<Rational>)> {
        if bits > self.bits {
            return None;
        }
        self.values.get(n.checked_sub(1)? as usize)
    }
}

/// `‖x‖` for a rational, exactly.
fn dist_rational(x: &Rational) -> Rational {
    let f = x - Rational::from(x.floor_ref());
    let g = Rational::from(1 - &f);
    if g < f { g } else { f }
}

fn frac_rational(x: &Rational) -> Rational {
    x - Rational::from(x.floor_ref())
}

/// Evaluates the system at a fixed θ for many `n`.
pub struct Evaluator<'a> {
    inst: &'a SystemInstance,
    theta: ExactScalar,
    policy: PrecisionPolicy,
    cache: Option<&'a PsiCache>,
    /// θ and `t_a(θ)` at the starting precision
    base: (BigReal, Option<BigReal>),
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a SystemInstance, theta: &ExactScalar, policy: &PrecisionPolicy) -> Result<Self> {
        if !inst.j.contains(theta.value()) {
            return Err(Error::Domain(format!("theta = {theta} is not in J = {}", inst.j)));
        }
        let base = Self::theta_terms(inst, theta, policy.start_bits)?;
        Ok(Evaluator { inst, theta: theta.clone(), policy: *policy, cache: None, base })
    }

    pub fn with_cache(mut self, cache: &'a PsiCache) -> Self {
        self.cache = Some(cache);
        self
    }

    fn theta_terms(inst: &SystemInstance, theta: &ExactScalar, bits: u32) -> Result<(BigReal, Option<BigReal>)> {
        let th = theta.enclose(bits);
        let t = match &inst.rho {
            TwistFamily::PowerPhase { exponent: TwistExponent::ThetaDependent { a }, .. } => {
                if theta.value() <= a.value() || *theta.value() >= 1 {
                    return Err(Error::Domain(format!("theta = {theta} is not in (a, 1) = ({a}, 1)")));
                }
                Some(t_map_enclosure(&a.enclose(bits), &th)?)
            }
            _ => None,
        };
        Ok((th, t))
    }

    fn psi(&self, n: u64, bits: u32) -> Result<(BigReal, Option<Rational>)> {
        if let Some(hit) = self.cache.and_then(|c| c.get(n, bits)) {
            return Ok(hit.clone());
        }
        let exact = self.inst.psi.exact(n)?;
        let enc = match &exact {
            Some(q) => BigReal::from_rational(q, bits),
            None => self.inst.psi.enclose(n, bits)?,
        };
        Ok((enc, exact))
    }

    /// One evaluation at a fixed precision. `Unresolved` when a needed
    /// decision straddles its boundary.
    fn eval_at(&self, n: u64, bits: u32, want_twist: bool) -> Result<SolutionRecord> {
        let owned;
        let (th, t) = if bits == self.policy.start_bits {
            (&self.base.0, self.base.1.as_ref())
        } else {
            owned = Self::theta_terms(self.inst, &self.theta, bits)?;
            (&owned.0, owned.1.as_ref())
        };
        let (psi, psi_exact) = self.psi(n, bits)?;

        let exact_residual = if self.inst.phi.is_zero() {
            Some(dist_rational(&Rational::from(self.theta.value() * n)))
        } else {
            None
        };
        let residual = match &exact_residual {
            Some(q) => BigReal::from_rational(q, bits),
            None => th.mul_u64(n).add(&self.inst.phi.value(n, th)?).dist_nearest_int(),
        };
        let first = match (&exact_residual, &psi_exact) {
            (Some(r), Some(p)) => r <= p,
            _ => residual.le(&psi)?,
        };

        if matches!(self.inst.rho, TwistFamily::None) {
            return Ok(SolutionRecord { n, residual, psi, twist: None, passed: first });
        }
        if !first && !want_twist {
            return Ok(SolutionRecord { n, residual, psi, twist: None, passed: false });
        }
        let twist = match self.inst.rho.exact(n) {
            Some(q) => {
                let f = frac_rational(&q);
                let inside = self.inst.i.contains(&f);
                Ok((BigReal::from_rational(&f, bits), inside))
            }
            None => {
                let rho = self.inst.rho.value(n, th, t)?.expect("twist present");
                rho.frac().and_then(|f| {
                    let inside = self.inst.i.contains_enclosure(&f)?;
                    Ok((f, inside))
                })
            }
        };
        match twist {
            Ok((f, inside)) => Ok(SolutionRecord { n, residual, psi, twist: Some(f), passed: first && inside }),
            // the verdict is already "fails"; an unresolved twist is just omitted
            Err(Error::Unresolved) if !first => Ok(SolutionRecord { n, residual, psi, twist: None, passed: false }),
            Err(e) => Err(e),
        }
    }

    /// Certified record for one `n`, escalating precision as needed.
    pub fn eval(&self, n: u64, want_twist: bool) -> Result<SolutionRecord> {
        if n == 0 {
            return Err(Error::Domain("n must be >= 1".into()));
        }
        self.policy
            .certify(format_args!("system at n = {n}"), |bits| self.eval_at(n, bits, want_twist))
            .map_err(|e| e.at(n))
    }
}

/// Certified evaluation of both conditions at one `(θ, n)`.
pub fn eval_instance(
    inst: &SystemInstance,
    theta: &ExactScalar,
    n: u64,
    policy: &PrecisionPolicy,
) -> Result<SolutionRecord> {
    Evaluator::new(inst, theta, policy)?.eval(n, true)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub primes_only: bool,
}

/// All passing `n` in `[n0, n1]`, increasing, truncated at `max_solutions`.
pub fn solve_system(
    inst: &SystemInstance,
    theta: &ExactScalar,
    n0: u64,
    n1: u64,
    max_solutions: usize,
    opts: SolveOptions,
    policy: &PrecisionPolicy,
) -> Result<Vec<SolutionRecord>> {
    let ev = Evaluator::new(inst, theta, policy)?;
    solve_with(&ev, n0, n1, max_solutions, opts)
}

pub(crate) fn solve_with(
    ev: &Evaluator<'_>,
    n0: u64,
    n1: u64,
    max_solutions: usize,
    opts: SolveOptions,
) -> Result<Vec<SolutionRecord>> {
    if n0 == 0 {
        return Err(Error::Precondition("n range must start at 1 or later".into()));
    }
    let mut out = Vec::new();
    for n in n0..=n1 {
        if out.len() >= max_solutions {
            break;
        }
        if opts.primes_only && !is_prime(n) {
            continue;
        }
        let rec = ev.eval(n, false)?;
        if rec.passed {
            out.push(rec);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetInterval {
    pub m: i64,
    /// `e_{n,m} = (m − φ_n(m/n))/n`
    pub center: BigReal,
    /// `ψ_n / (2n)`
    pub half_width: BigReal,
}

/// The intervals `E_{n,m}` for every `m` with `m/n ∈ J`, sorted by center.
pub fn target_intervals(inst: &SystemInstance, n: u64, policy: &PrecisionPolicy) -> Result<Vec<TargetInterval>> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let ms = inst.j.scaled_integers(n)?;
    if ms.is_empty() {
        return Err(Error::EmptyRange(format!("{n}·J contains no integer")));
    }
    let bits = policy.cap_bits.min(policy.start_bits.max(256));
    let psi = inst.psi.enclose(n, bits)?;
    let half_width = psi.div_u64(2 * n);
    let mut out = ms
        .map(|m| {
            let x = BigReal::from_rational(&Rational::from((Integer::from(m), Integer::from(n))), bits);
            let center = BigReal::from_i64(m, bits).sub(&inst.phi.value(n, &x)?).div_u64(n);
            Ok(TargetInterval { m, center, half_width: half_width.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.center.value().partial_cmp(&b.center.value()).expect("finite centers"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> ExactScalar {
        x.parse().unwrap()
    }

    fn inst(j: &str, psi: &str, phi: &str, rho: &str, i: &str) -> SystemInstance {
        SystemInstance::new(j.parse().unwrap(), psi.parse().unwrap(), phi.parse().unwrap(), rho.parse().unwrap(), i.parse().unwrap())
            .unwrap()
    }

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    #[test]
    fn eval_examples() {
        let base = inst("0,1", "power:0.1,0.5", "zero", "none", "0,1");
        let r = eval_instance(&base, &s("1/2"), 2, &pol()).unwrap();
        assert!(r.passed);
        assert_eq!(r.residual.to_f64(), 0.0);
        let r = eval_instance(&base, &s("1/2"), 3, &pol()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.residual.to_f64(), 0.5);
        let sinus = inst("-1,1", "power:0.1,0.5", "sin:1/3,1/6", "none", "0,1");
        let r = eval_instance(&sinus, &s("0"), 5, &pol()).unwrap();
        assert!(r.passed);
        assert_eq!(r.residual.to_f64(), 0.0);
        assert!(eval_instance(&base, &s("1"), 2, &pol()).is_err());
    }

    #[test]
    fn exact_ties_are_inclusive() {
        // ‖1/10‖ = 1/10 = ψ_1
        let t = inst("0,1", "const:1/10", "zero", "none", "0,1");
        assert!(eval_instance(&t, &s("1/10"), 1, &pol()).unwrap().passed);
    }

    #[test]
    fn solve_examples() {
        let base = inst("0,1", "power:0.1,0.5", "zero", "none", "0,1");
        let ns = |th: &str, n1| -> Vec<u64> {
            solve_system(&base, &s(th), 1, n1, usize::MAX, SolveOptions::default(), &pol())
                .unwrap()
                .iter()
                .map(|r| r.n)
                .collect()
        };
        assert_eq!(ns("1/2", 10), vec![2, 4, 6, 8, 10]);
        assert_eq!(ns("1/3", 9), vec![3, 6, 9]);
        let capped = solve_system(&base, &s("1/2"), 1, 10, 2, SolveOptions::default(), &pol()).unwrap();
        assert_eq!(capped.len(), 2);
        let primes = solve_system(&base, &s("1/2"), 1, 10, 10, SolveOptions { primes_only: true }, &pol()).unwrap();
        assert_eq!(primes.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn twist_filters_solutions() {
        // {n^2/2} ∈ [0, 1/2) keeps even n only
        let t = inst("0,1", "power:0.1,0.5", "zero", "power:1/2,2", "0,1/2");
        let out = solve_system(&t, &s("1/3"), 1, 12, 100, SolveOptions::default(), &pol()).unwrap();
        assert_eq!(out.iter().map(|r| r.n).collect::<Vec<_>>(), vec![6, 12]);
        let r = eval_instance(&t, &s("1/3"), 3, &pol()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.twist.unwrap().to_f64(), 0.5);
    }

    #[test]
    fn targets() {
        let t = inst("0,1", "const:0.09", "zero", "none", "0,1");
        let out = target_intervals(&t, 10, &pol()).unwrap();
        assert_eq!(out.len(), 9);
        assert!((out[0].half_width.to_f64() - 0.0045).abs() < 1e-18);
        assert!((out[3].center.to_f64() - 0.4).abs() < 1e-18);
        let narrow = inst("0.3,0.45", "const:0.09", "zero", "none", "0,1");
        let out = target_intervals(&narrow, 10, &pol()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].m, 4);
        assert!(matches!(target_intervals(&narrow, 1, &pol()), Err(Error::EmptyRange(_))));
    }

    #[test]
    fn instance_json_round_trip() {
        let t = inst("0.3,0.45", "power:1/10,t(1/4,0.45)-1", "psshift:1/4,1", "power-t:1,1/4", "0,1/2");
        let back = SystemInstance::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert!(SystemInstance::from_json(r#"{"J":{"lo":"1","hi":"0"}}"#).is_err());
    }
}
