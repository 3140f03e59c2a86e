//! The explicit Erdős–Turán count for `{αℓ}`:
//! `#{ℓ ≤ L : {αℓ} ∈ J′} ≤ Lλ(J) + 2L/(H+1) + 6 Σ_{h ≤ H} 1/(h‖hα‖)`.

use rayon::prelude::*;
use rug::float::Round;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{HalfOpenInterval, OpenInterval};
use crate::numeric::{BigReal, ExactScalar, PrecisionPolicy, RealExpr};

/// `J` reduced modulo 1 as at most two disjoint pieces of `[0, 1)`.
pub fn reduce_mod_1(j: &OpenInterval) -> Vec<HalfOpenInterval> {
    let len = j.length();
    if len >= 1 {
        return vec![HalfOpenInterval::full()];
    }
    let lo = j.lo.value();
    let start = lo - lo.clone().floor();
    let end = Rational::from(&start + &len);
    let piece = |a: Rational, b: Rational| HalfOpenInterval { lo: ExactScalar::from_rational(a), hi: ExactScalar::from_rational(b) };
    if end <= 1 {
        vec![piece(start, end)]
    } else {
        let wrapped = end - 1u32;
        if wrapped == 0 {
            vec![piece(start, Rational::from(1))]
        } else {
            vec![piece(start, Rational::from(1)), piece(Rational::new(), wrapped)]
        }
    }
}

fn in_pieces_exact(x: &Rational, pieces: &[HalfOpenInterval]) -> bool {
    pieces.iter().any(|p| p.contains(x))
}

fn in_pieces_enclosed(x: &BigReal, pieces: &[HalfOpenInterval]) -> Result<bool> {
    let mut hit = false;
    for p in pieces {
        hit |= p.contains_enclosure(x)?;
    }
    Ok(hit)
}

/// `#{1 ≤ ℓ ≤ L : {αℓ} ∈ J′}` with `J′` the half-open reduction of `J`.
pub fn count_in_interval(alpha: &RealExpr, l: u64, j: &OpenInterval, policy: &PrecisionPolicy) -> Result<u64> {
    if l == 0 {
        return Err(Error::Precondition("L must be at least 1".into()));
    }
    j.validate()?;
    let pieces = reduce_mod_1(j);
    if pieces[0].is_full() {
        return Ok(l);
    }
    if let Some(a) = alpha.as_rational() {
        let hits = (1..=l)
            .filter(|&k| {
                let x = Rational::from(a * k);
                let f = &x - x.clone().floor();
                in_pieces_exact(&f, &pieces)
            })
            .count();
        return Ok(hits as u64);
    }
    let start = alpha.enclose(policy.start_bits)?;
    let hits: Vec<Result<bool>> = (1..=l)
        .into_par_iter()
        .map(|k| {
            let quick = start.mul_u64(k).frac().and_then(|f| in_pieces_enclosed(&f, &pieces));
            match quick {
                Err(Error::Unresolved) => policy
                    .certify("fractional part against J'", |bits| {
                        in_pieces_enclosed(&alpha.enclose(bits)?.mul_u64(k).frac()?, &pieces)
                    })
                    .map_err(|e| e.at(k)),
                other => other,
            }
        })
        .collect();
    hits.into_iter().try_fold(0u64, |acc, h| Ok(acc + h? as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    #[serde(rename = "H")]
    pub h: u64,
    pub count: u64,
    /// `main + middle + tail`, rounded up
    pub bound: f64,
    /// `Lλ(J)`
    pub main: f64,
    /// `2L/(H+1)`
    pub middle: f64,
    /// `6 Σ 1/(h‖hα‖)`, rounded up
    pub tail: f64,
    pub violated: bool,
}

/// Upper bound of `1/(h‖hα‖)`, or `IntegerMultiple` when `hα ∈ ℤ`.
fn tail_term(alpha: &RealExpr, h: u64, policy: &PrecisionPolicy) -> Result<Float> {
    let bits = policy.start_bits;
    let dist = match alpha.as_rational() {
        Some(a) => {
            let x = Rational::from(a * h);
            if *x.denom() == 1 {
                return Err(Error::IntegerMultiple { h });
            }
            let f = &x - x.clone().floor();
            let d = if f > (1, 2) { 1 - f } else { f };
            BigReal::from_rational(&d, bits)
        }
        None => policy
            .certify("h*alpha away from the integers", |b| {
                let d = alpha.enclose(b)?.mul_u64(h).dist_nearest_int();
                if *d.lo() > 0 {
                    Ok(d.with_bits(bits))
                } else {
                    Err(Error::Unresolved)
                }
            })
            .map_err(|e| e.at(h))?,
    };
    Ok(BigReal::from_u64(1, bits).div(&dist.mul_u64(h))?.hi().clone())
}

fn report(count: u64, l: u64, lam: &Rational, h: u64, tail_sum: &Float) -> DiscrepancyReport {
    let bits = tail_sum.prec();
    let main = Float::with_val_round(bits, lam * Rational::from(l), Round::Up).0;
    let middle = Float::with_val_round(bits, Rational::from((2 * l, h + 1)), Round::Up).0;
    let tail = Float::with_val_round(bits, tail_sum * 6u32, Round::Up).0;
    let bound = Float::with_val_round(bits, &main + &middle, Round::Up).0;
    let bound = Float::with_val_round(bits, &bound + &tail, Round::Up).0;
    DiscrepancyReport {
        h,
        count,
        bound: bound.to_f64_round(Round::Up),
        main: main.to_f64(),
        middle: middle.to_f64(),
        tail: tail.to_f64_round(Round::Up),
        violated: Float::with_val(bits, count) > bound,
    }
}

fn running_tails(terms: &[Float]) -> Vec<Float> {
    let mut acc = Float::with_val(terms.first().map_or(64, Float::prec), 0);
    terms
        .iter()
        .map(|t| {
            acc = Float::with_val_round(acc.prec(), &acc + t, Round::Up).0;
            acc.clone()
        })
        .collect()
}

/// The bound at a single `H`; `IntegerMultiple` if some `hα ∈ ℤ`, `h ≤ H`.
pub fn erdos_turan_bound(alpha: &RealExpr, l: u64, j: &OpenInterval, h: u64, policy: &PrecisionPolicy) -> Result<DiscrepancyReport> {
    if h == 0 {
        return Err(Error::Precondition("H must be at least 1".into()));
    }
    let terms = (1..=h).map(|k| tail_term(alpha, k, policy)).collect::<Result<Vec<_>>>()?;
    let count = count_in_interval(alpha, l, j, policy)?;
    let tails = running_tails(&terms);
    Ok(report(count, l, &j.length(), h, &tails[tails.len() - 1]))
}

/// Reports for every admissible `H ≤ h_max`; `Violation(H)` if any bound fails.
pub fn verify_lemma(alpha: &RealExpr, l: u64, j: &OpenInterval, h_max: u64, policy: &PrecisionPolicy) -> Result<Vec<DiscrepancyReport>> {
    if h_max == 0 {
        return Err(Error::Precondition("H_max must be at least 1".into()));
    }
    let count = count_in_interval(alpha, l, j, policy)?;
    let mut terms = Vec::new();
    for h in 1..=h_max {
        // admissibility is monotone in H, so stop at the first integer multiple
        match tail_term(alpha, h, policy) {
            Ok(t) => terms.push(t),
            Err(Error::IntegerMultiple { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let lam = j.length();
    let reports: Vec<DiscrepancyReport> =
        running_tails(&terms).iter().zip(1..).map(|(tail, h)| report(count, l, &lam, h, tail)).collect();
    if let Some(bad) = reports.iter().find(|r| r.violated) {
        return Err(Error::Violation { h: bad.h });
    }
    Ok(reports)
}

/// The proof's choice `H = ⌊1/λ(J)⌋`, at least 1.
pub fn paper_h(j: &OpenInterval) -> u64 {
    let inv = j.length().recip().floor();
    inv.numer().to_u64().unwrap_or(u64::MAX).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> RealExpr {
        s.parse().unwrap()
    }

    fn j(s: &str) -> OpenInterval {
        s.parse().unwrap()
    }

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    fn pieces(s: &str) -> Vec<(f64, f64)> {
        reduce_mod_1(&j(s)).iter().map(|p| (p.lo.to_f64(), p.hi.to_f64())).collect()
    }

    #[test]
    fn reductions() {
        assert_eq!(pieces("0.2,0.7"), vec![(0.2, 0.7)]);
        assert_eq!(pieces("0.8,1.3"), vec![(0.8, 1.0), (0.0, 0.3)]);
        assert_eq!(pieces("-0.1,1.2"), vec![(0.0, 1.0)]);
        assert_eq!(pieces("-0.01,0.49"), vec![(0.99, 1.0), (0.0, 0.49)]);
        assert_eq!(pieces("1/2,1"), vec![(0.5, 1.0)]);
    }

    #[test]
    fn counts() {
        assert_eq!(count_in_interval(&e("1/2"), 4, &j("-0.01,0.49"), &pol()), Ok(2));
        assert_eq!(count_in_interval(&e("1/3"), 3, &j("-0.01,0.5"), &pol()), Ok(2));
        assert_eq!(count_in_interval(&e("sqrt(2)"), 100, &j("0,0.5"), &pol()), Ok(51));
        assert!(matches!(count_in_interval(&e("sqrt(2)"), 0, &j("0,0.5"), &pol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn additive_over_pieces() {
        let a = e("(1+sqrt(5))/2");
        let whole = count_in_interval(&a, 2000, &j("0.8,1.3"), &pol()).unwrap();
        let left = count_in_interval(&a, 2000, &j("0.8,1"), &pol()).unwrap();
        let right = count_in_interval(&a, 2000, &j("0,0.3"), &pol()).unwrap();
        assert_eq!(whole, left + right);
    }

    #[test]
    fn single_bounds() {
        assert_eq!(erdos_turan_bound(&e("1/2"), 4, &j("-0.01,0.49"), 2, &pol()), Err(Error::IntegerMultiple { h: 2 }));
        let r = erdos_turan_bound(&e("sqrt(2)"), 100, &j("0,0.5"), 1, &pol()).unwrap();
        assert!((r.bound - 164.48528137423857).abs() < 1e-9);
        assert_eq!(r.count, 51);
        assert!(!r.violated);
        assert!(r.bound >= r.main + r.middle + r.tail - 1e-9);
        let r = erdos_turan_bound(&e("(1+sqrt(5))/2"), 10_000, &j("0,0.1"), 20, &pol()).unwrap();
        assert_eq!(r.count, 1000);
        assert!((r.bound - 2064.1856930099444).abs() < 1e-8);
        assert!(!r.violated);
    }

    #[test]
    fn lemma_sweeps() {
        let reps = verify_lemma(&e("sqrt(2)"), 1000, &j("0.3,0.4"), 30, &pol()).unwrap();
        assert_eq!(reps.len(), 30);
        assert!(reps.iter().all(|r| r.count == 100 && !r.violated));
        let reps = verify_lemma(&e("1/3"), 9, &j("0,0.5"), 5, &pol()).unwrap();
        assert_eq!(reps.iter().map(|r| r.h).collect::<Vec<_>>(), vec![1, 2]);
        let single = erdos_turan_bound(&e("sqrt(2)"), 1000, &j("0.3,0.4"), 17, &pol()).unwrap();
        let reps = verify_lemma(&e("sqrt(2)"), 1000, &j("0.3,0.4"), 17, &pol()).unwrap();
        assert_eq!(single, reps[16]);
        assert!(matches!(verify_lemma(&e("sqrt(2)"), 0, &j("0.3,0.4"), 3, &pol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn paper_choice_of_h() {
        assert_eq!(paper_h(&j("0.3,0.4")), 10);
        assert_eq!(paper_h(&j("0,3")), 1);
    }
}
