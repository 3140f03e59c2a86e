//! Equidistribution diagnostics for `γ n^{t_a(m/n − φ_n(m/n)/n)}`, `m ∈ nJ′`:
//! Weyl sums, van der Corput differences, star discrepancy.

use rayon::prelude::*;
use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{HalfOpenInterval, OpenInterval};
use crate::numeric::{t_map, t_map_enclosure, BigReal, ExactScalar, PrecisionPolicy};
use crate::systems::PerturbationFamily;

/// Parameters of the sequence family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct C1Family {
    pub a: ExactScalar,
    pub gamma: ExactScalar,
    pub phi: PerturbationFamily,
    pub n: u64,
    #[serde(rename = "J")]
    pub j: OpenInterval,
}

/// Where a sample came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSource {
    C1 {
        family: C1Family,
        m_first: i64,
        m_last: i64,
        /// `t_a` at the endpoints of `J̄′`
        t_min: f64,
        t_max: f64,
    },
    Difference { lag: u64 },
    Given,
}

/// Finite sequence in `[0, 1)`, each value a certified enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSample {
    pub values: Vec<BigReal>,
    pub source: SampleSource,
}

impl SequenceSample {
    pub fn from_rationals(values: &[Rational], bits: u32) -> Result<Self> {
        let values = values
            .iter()
            .map(|v| {
                let f = v - v.clone().floor();
                BigReal::from_rational(&f, bits)
            })
            .collect();
        Ok(SequenceSample { values, source: SampleSource::Given })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Midpoints, for output.
    pub fn approx(&self) -> Vec<f64> {
        self.values.iter().map(BigReal::to_f64).collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.values.iter().map(|v| v.radius().to_f64_round(Round::Up)).fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct SampleView<'a> {
    #[serde(rename = "N")]
    n: usize,
    source: &'a SampleSource,
    max_radius: f64,
    values: Vec<f64>,
}

impl Serialize for SequenceSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SampleView { n: self.len(), source: &self.source, max_radius: self.max_radius(), values: self.approx() }.serialize(s)
    }
}

impl C1Family {
    pub fn new(a: ExactScalar, gamma: ExactScalar, phi: PerturbationFamily, n: u64, j: OpenInterval) -> Result<Self> {
        let fam = C1Family { a, gamma, phi, n, j };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.a.value();
        if *a <= 0 || *a >= 1 {
            return Err(Error::Precondition(format!("a = {} is not in (0,1)", self.a)));
        }
        if *self.gamma.value() == 0 {
            return Err(Error::Precondition("gamma must be nonzero".into()));
        }
        if self.n == 0 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        self.j.validate()?;
        self.phi.validate()?;
        let (lo, hi) = (self.j.lo.value(), self.j.hi.value());
        // J̄′ ⊂ (a, √a)  ⇔  lo > a and hi² < a
        if lo <= a || Rational::from(hi * hi) >= *a {
            return Err(Error::ClosureViolation(format!("J' = {} with a = {}", self.j, self.a)));
        }
        Ok(())
    }

    /// `g_n` at `m`, before reduction mod 1.
    pub fn raw_at(&self, m: i64, bits: u32) -> Result<BigReal> {
        let n = self.n;
        let x = BigReal::from_rational(&Rational::from((m, n)), bits);
        let theta = if self.phi.is_zero() { x } else { x.sub(&self.phi.value(n, &x)?.div_u64(n)) };
        let t = t_map_enclosure(&self.a.enclose(bits), &theta)?;
        let pow = t.mul(&BigReal::from_u64(n, bits).ln()?).exp();
        Ok(self.gamma.enclose(bits).mul(&pow))
    }

    fn value_at(&self, m: i64, policy: &PrecisionPolicy) -> Result<BigReal> {
        policy
            .certify("fractional part of the sequence", |bits| self.raw_at(m, bits)?.frac())
            .map_err(|e| e.at(m.unsigned_abs()))
    }

    pub fn m_range(&self) -> Result<std::ops::RangeInclusive<i64>> {
        let ms = self.j.scaled_integers(self.n)?;
        if ms.is_empty() {
            return Err(Error::EmptyRange(format!("no m with m/{} in {}", self.n, self.j)));
        }
        Ok(ms)
    }

    /// `g_n(x) = γ n^{t_a(f_n(x))}` with `m = x + ⌊j₁n⌋`, as in the differencing argument.
    pub fn generator(&self, policy: &PrecisionPolicy) -> impl Fn(u64) -> Result<BigReal> + Sync + '_ {
        let offset = Rational::from(self.j.lo.value() * self.n).floor().numer().to_i64().unwrap_or(0);
        let bits = policy.start_bits;
        move |x| self.raw_at(offset + x as i64, bits)
    }
}

/// `{γ n^{t_a((m − φ_n(m/n))/n)}}` for `m ∈ nJ′ ∩ ℤ`, increasing in `m`.
pub fn sequence_c1(family: &C1Family, policy: &PrecisionPolicy) -> Result<SequenceSample> {
    family.validate()?;
    let ms = family.m_range()?;
    let results: Vec<Result<BigReal>> = ms.clone().into_par_iter().map(|m| family.value_at(m, policy)).collect();
    let values = results.into_iter().collect::<Result<Vec<_>>>()?;
    let t_at = |x: &ExactScalar| t_map(&family.a, x, 64).map(|t| t.to_f64());
    Ok(SequenceSample {
        values,
        source: SampleSource::C1 {
            family: family.clone(),
            m_first: *ms.start(),
            m_last: *ms.end(),
            t_min: t_at(&family.j.lo)?,
            t_max: t_at(&family.j.hi)?,
        },
    })
}

/// `|(1/N) Σ e(b x_i)|`, clamped to `[0, 1]`.
pub fn weyl_sum(sample: &SequenceSample, b: i64) -> Result<BigReal> {
    if b == 0 {
        return Err(Error::Precondition("b must be nonzero".into()));
    }
    if sample.is_empty() {
        return Err(Error::Precondition("empty sample".into()));
    }
    let bits = sample.values.iter().map(BigReal::bits).min().unwrap_or(128).max(64);
    let turn = BigReal::pi(bits).mul_u64(2 * b.unsigned_abs());
    let parts: Vec<(BigReal, BigReal)> = sample
        .values
        .par_iter()
        .map(|x| {
            let arg = turn.mul(&x.with_bits(bits));
            (arg.cos(), arg.sin())
        })
        .collect();
    let (mut c, mut s) = (BigReal::zero(bits), BigReal::zero(bits));
    for (ci, si) in &parts {
        c = c.add(ci);
        s = s.add(si);
    }
    let (c, s) = (c.abs(), s.abs());
    let norm = c.mul(&c).add(&s.mul(&s)).sqrt()?.div_u64(sample.len() as u64);
    let zero = Float::with_val(bits, 0);
    let one = Float::with_val(bits, 1);
    let lo = if *norm.lo() < 0 { zero } else { norm.lo().clone() };
    let hi = if *norm.hi() > 1 { one } else { norm.hi().clone() };
    BigReal::from_endpoints(lo.clone().min(&hi), hi)
}

/// `{g(i + h) − g(i)}` for `i = 1..=N−h`.
pub fn vdc_difference(generator: impl Fn(u64) -> Result<BigReal> + Sync, n: u64, h: u64) -> Result<SequenceSample> {
    if h == 0 || n <= h {
        return Err(Error::Domain(format!("need 1 <= h < N, got h = {h}, N = {n}")));
    }
    let results: Vec<Result<BigReal>> = (1..=n - h)
        .into_par_iter()
        .map(|i| generator(i + h)?.sub(&generator(i)?).frac().map_err(|e| e.at(i)))
        .collect();
    Ok(SequenceSample { values: results.into_iter().collect::<Result<_>>()?, source: SampleSource::Difference { lag: h } })
}

/// `D*_N = max_i max(x_(i) − (i−1)/N, i/N − x_(i))`, bracketed by sorting
/// lower and upper endpoints separately.
pub fn star_discrepancy(sample: &SequenceSample) -> Result<BigReal> {
    if sample.is_empty() {
        return Err(Error::Precondition("empty sample".into()));
    }
    let bits = sample.values.iter().map(BigReal::bits).max().unwrap_or(128);
    let mut los: Vec<Float> = sample.values.iter().map(|v| v.lo().clone()).collect();
    let mut his: Vec<Float> = sample.values.iter().map(|v| v.hi().clone()).collect();
    los.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    his.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = Integer::from(sample.len());
    let step = |i: usize, r: Round| Float::with_val_round(bits, Rational::from((Integer::from(i), n.clone())), r).0;
    let sub = |a: &Float, b: &Float, r: Round| Float::with_val_round(bits, a - b, r).0;
    let mut upper = Float::with_val(bits, 0);
    let mut lower = Float::with_val(bits, 0);
    for (i, (lo, hi)) in los.iter().zip(&his).enumerate() {
        let u = sub(hi, &step(i, Round::Down), Round::Up).max(&sub(&step(i + 1, Round::Up), lo, Round::Up));
        let l = sub(lo, &step(i, Round::Up), Round::Down).max(&sub(&step(i + 1, Round::Down), hi, Round::Down));
        upper.max_mut(&u);
        lower.max_mut(&l);
    }
    BigReal::from_endpoints(lower, upper)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidRow {
    #[serde(rename = "I")]
    pub interval: HalfOpenInterval,
    pub proportion: f64,
    pub length: f64,
    pub deviation: f64,
}

/// Empirical share of the sample in each interval against its length.
pub fn equid_report(sample: &SequenceSample, intervals: &[HalfOpenInterval]) -> Result<Vec<EquidRow>> {
    if sample.is_empty() {
        return Err(Error::Precondition("empty sample".into()));
    }
    intervals
        .iter()
        .map(|iv| {
            iv.validate_unit()?;
            let mut hits = 0u64;
            for (k, x) in sample.values.iter().enumerate() {
                let inside = iv.contains_enclosure(x).map_err(|e| match e {
                    Error::Unresolved => Error::AmbiguousAtMaxPrecision {
                        bits: x.bits(),
                        what: format!("sample value {k} against {iv}"),
                    },
                    other => other,
                })?;
                hits += inside as u64;
            }
            let share = Rational::from((hits, sample.len() as u64));
            let len = iv.length();
            let dev = Rational::from(&share - &len).abs();
            Ok(EquidRow {
                interval: iv.clone(),
                proportion: crate::numeric::rational_to_f64(&share),
                length: crate::numeric::rational_to_f64(&len),
                deviation: crate::numeric::rational_to_f64(&dev),
            })
        })
        .collect()
}

/// `(b, |Weyl sum|)` for `b` in a symmetric nonzero range, as midpoint and radius.
pub fn weyl_profile(sample: &SequenceSample, b_max: u64) -> Result<Vec<(i64, BigReal)>> {
    let b_max = i64::try_from(b_max).map_err(|_| Error::Precondition("b range too large".into()))?;
    (1..=b_max).map(|b| Ok((b, weyl_sum(sample, b)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    fn fam(phi: &str, n: u64) -> C1Family {
        C1Family::new(ExactScalar::ratio(1, 4), ExactScalar::from_int(1), phi.parse().unwrap(), n, "0.30,0.45".parse().unwrap())
            .unwrap()
    }

    fn given(v: &[(i64, i64)]) -> SequenceSample {
        SequenceSample::from_rationals(&v.iter().map(|&(a, b)| Rational::from((a, b))).collect::<Vec<_>>(), 128).unwrap()
    }

    #[test]
    fn c1_examples() {
        let s = sequence_c1(&fam("zero", 10), &pol()).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.values[0].to_f64() - 0.579_288_441_894_978_8).abs() < 1e-15);
        assert!(matches!(sequence_c1(&fam("zero", 1), &pol()), Err(Error::EmptyRange(_))));
        let s = sequence_c1(&fam("psshift:1/4,1", 10_000), &pol()).unwrap();
        assert_eq!(s.len(), 1499);
        assert!(s.values.iter().all(|v| *v.lo() >= 0 && *v.hi() < 1));
        let bad = C1Family::new(ExactScalar::ratio(1, 4), ExactScalar::from_int(1), PerturbationFamily::Zero, 10, "0.3,0.5".parse().unwrap());
        assert!(matches!(bad, Err(Error::ClosureViolation(_))));
    }

    #[test]
    fn weyl_sums() {
        let w = weyl_sum(&given(&[(0, 1), (0, 1), (0, 1)]), 1).unwrap();
        assert!((w.to_f64() - 1.0).abs() < 1e-30 && *w.hi() <= 1);
        assert!(weyl_sum(&given(&[(0, 1), (1, 2)]), 1).unwrap().to_f64() < 1e-30);
        let grid: Vec<(i64, i64)> = (0..7).map(|j| (j, 7)).collect();
        for b in [1, 3, -2, 6] {
            assert!(weyl_sum(&given(&grid), b).unwrap().to_f64() < 1e-30);
        }
        assert!(weyl_sum(&given(&grid), 0).is_err());
    }

    #[test]
    fn differences() {
        let s = vdc_difference(|_| Ok(BigReal::from_u64(5, 128)), 10, 3).unwrap();
        assert_eq!(s.len(), 7);
        assert!(s.values.iter().all(|v| v.to_f64() == 0.0));
        let s = vdc_difference(|i| Ok(BigReal::from_rational(&Rational::from((3 * i, 10)), 128)), 10, 1).unwrap();
        assert!(s.values.iter().all(|v| (v.to_f64() - 0.3).abs() < 1e-30));
        assert!(vdc_difference(|_| Ok(BigReal::zero(64)), 3, 3).is_err());

        let f = fam("zero", 1000);
        let n = f.m_range().unwrap().count() as u64;
        let d = vdc_difference(f.generator(&pol()), n, 1).unwrap();
        assert_eq!(d.len(), 148);
        let mean = d.approx().iter().sum::<f64>() / d.len() as f64;
        assert!((mean - 0.510_343_755_429_879).abs() < 1e-12);
        assert!((star_discrepancy(&d).unwrap().to_f64() - 0.066_394_371_067_011_76).abs() < 1e-12);
        assert!((weyl_sum(&d, 1).unwrap().to_f64() - 0.075_997_013_139_702_13).abs() < 1e-12);
    }

    #[test]
    fn star_discrepancies() {
        assert_eq!(star_discrepancy(&given(&[(1, 2)])).unwrap().to_f64(), 0.5);
        assert_eq!(star_discrepancy(&given(&[(1, 4), (3, 4)])).unwrap().to_f64(), 0.25);
        assert_eq!(star_discrepancy(&given(&[(0, 1), (0, 1), (0, 1)])).unwrap().to_f64(), 1.0);
        let d = star_discrepancy(&sequence_c1(&fam("psshift:1/4,1", 1000), &pol()).unwrap()).unwrap();
        assert!((d.to_f64() - 0.062_789_720_9).abs() < 1e-9);
    }

    #[test]
    fn equid_rows() {
        let grid: Vec<(i64, i64)> = (0..10).map(|j| (j, 10)).collect();
        let rows = equid_report(&given(&grid), &["0,1/2".parse().unwrap()]).unwrap();
        assert!(rows[0].deviation <= 0.1);
        assert!(equid_report(&given(&grid), &[]).unwrap().is_empty());

        let s = sequence_c1(&fam("psshift:1/4,1", 1000), &pol()).unwrap();
        let d = star_discrepancy(&s).unwrap();
        for t in ["1/10", "1/3", "0.77"] {
            let iv: HalfOpenInterval = format!("0,{t}").parse().unwrap();
            assert!(equid_report(&s, &[iv]).unwrap()[0].deviation <= d.hi().to_f64());
        }
    }
}
