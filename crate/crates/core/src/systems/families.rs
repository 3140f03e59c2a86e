use std::fmt;
use std::str::FromStr;

use rug::float::Round;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::OpenInterval;
use crate::numeric::{exact_pow, pow_enclosure, t_map_enclosure, BigReal, ExactScalar, RealExpr};

/// Number of pieces `J̄` is cut into when bounding sup norms.
pub const SUP_PIECES: u64 = 64;

fn tenth() -> Rational {
    Rational::from((1, 10))
}

/// Accuracy sequence `ψ_n`, always in `(0, 1/10]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsiFamily {
    /// `ψ_n = min(c, 1/10) / n^σ`
    PowerLaw { c: ExactScalar, sigma: RealExpr },
    /// `ψ_n = c` with `0 < c <= 1/10`
    ConstantBelowTenth { c: ExactScalar },
    /// Explicit `ψ_1, ψ_2, …`; undefined past the end.
    Table { values: Vec<ExactScalar> },
}

impl PsiFamily {
    pub fn power_law(c: ExactScalar, sigma: RealExpr) -> Result<Self> {
        let out = PsiFamily::PowerLaw { c, sigma };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |x: &Rational| *x > 0 && *x <= tenth();
        match self {
            PsiFamily::PowerLaw { c, sigma } => {
                if !c.is_positive() {
                    return Err(Error::Precondition(format!("psi: c = {c} must be positive")));
                }
                let s = sigma.enclose(64)?;
                if s.is_positive() != Some(true) && sigma.as_rational().is_none_or(|q| *q != 0) {
                    return Err(Error::Precondition(format!("psi: sigma = {sigma} must be >= 0")));
                }
                Ok(())
            }
            PsiFamily::ConstantBelowTenth { c } => {
                if !in_range(c.value()) {
                    return Err(Error::Precondition(format!("psi: constant {c} is not in (0, 1/10]")));
                }
                Ok(())
            }
            PsiFamily::Table { values } => {
                if values.is_empty() {
                    return Err(Error::Precondition("psi: empty table".into()));
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !in_range(v.value())) {
                    return Err(Error::Precondition(format!("psi: table entry {} = {v} is not in (0, 1/10]", i + 1)));
                }
                Ok(())
            }
        }
    }

    /// `ψ_n` when it is rational and cheap to compute exactly.
    pub fn exact(&self, n: u64) -> Result<Option<Rational>> {
        if n == 0 {
            return Err(Error::Domain("psi_n needs n >= 1".into()));
        }
        match self {
            PsiFamily::PowerLaw { c, sigma } => {
                let scale = if *c.value() < tenth() { c.value().clone() } else { tenth() };
                Ok(sigma.as_rational().and_then(|s| exact_pow(n, s)).map(|p| scale / p))
            }
            PsiFamily::ConstantBelowTenth { c } => Ok(Some(c.value().clone())),
            PsiFamily::Table { values } => match values.get((n - 1) as usize) {
                Some(v) => Ok(Some(v.value().clone())),
                None => Err(Error::Domain(format!("psi table has {} entries, asked for n = {n}", values.len()))),
            },
        }
    }

    pub fn enclose(&self, n: u64, bits: u32) -> Result<BigReal> {
        if let Some(q) = self.exact(n)? {
            return Ok(BigReal::from_rational(&q, bits));
        }
        match self {
            PsiFamily::PowerLaw { c, sigma } => {
                let scale = if *c.value() < tenth() { c.value().clone() } else { tenth() };
                let p = match sigma.as_rational() {
                    Some(s) => pow_enclosure(n, &ExactScalar::Rational(s.clone()), bits)?,
                    None => BigReal::from_u64(n, bits).ln()?.mul(&sigma.enclose(bits)?).exp(),
                };
                BigReal::from_rational(&scale, bits).div(&p)
            }
            _ => unreachable!("constant and table values are exact"),
        }
    }

    /// Lossy `ψ_n`, for diagnostics.
    pub fn approx(&self, n: u64) -> Result<f64> {
        Ok(self.enclose(n, 64)?.to_f64())
    }

    /// Largest `n` for which `ψ_n` is defined.
    pub fn len(&self) -> Option<u64> {
        match self {
            PsiFamily::Table { values } => Some(values.len() as u64),
            _ => None,
        }
    }
}

/// Perturbation `φ_n(θ)` with its closed-form derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationFamily {
    Zero,
    /// `sin(n^κ θ) / n^δ`
    Sinusoid { kappa: ExactScalar, delta: ExactScalar },
    /// `κθ / (t_a(θ) n^{t_a(θ)−1})`
    PsShift { a: ExactScalar, kappa: ExactScalar },
}

fn neg_pow(n: u64, e: &ExactScalar, bits: u32) -> Result<BigReal> {
    let p = pow_enclosure(n, e, bits)?;
    BigReal::from_u64(1, bits).div(&p)
}

impl PerturbationFamily {
    pub fn validate(&self) -> Result<()> {
        if let PerturbationFamily::PsShift { a, .. } = self {
            if *a.value() <= 0 || *a.value() >= 1 {
                return Err(Error::Precondition(format!("phi: a = {a} is not in (0,1)")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PerturbationFamily::Zero)
            || matches!(self, PerturbationFamily::PsShift { kappa, .. } if *kappa.value() == 0)
    }

    fn check_theta(&self, theta: &BigReal) -> Result<()> {
        if let PerturbationFamily::PsShift { a, .. } = self {
            if *theta.lo() <= *a.value() || *theta.hi() >= 1 {
                return Err(Error::Domain(format!("PS shift needs theta in ({a}, 1)")));
            }
        }
        Ok(())
    }

    /// `φ_n(θ)` on an enclosure of θ.
    pub fn value(&self, n: u64, theta: &BigReal) -> Result<BigReal> {
        let bits = theta.bits();
        match self {
            PerturbationFamily::Zero => Ok(BigReal::zero(bits)),
            PerturbationFamily::Sinusoid { kappa, delta } => {
                let arg = pow_enclosure(n, kappa, bits)?.mul(theta);
                Ok(arg.sin().mul(&neg_pow(n, delta, bits)?))
            }
            PerturbationFamily::PsShift { a, kappa } => {
                if *kappa.value() == 0 {
                    return Ok(BigReal::zero(bits));
                }
                self.check_theta(theta)?;
                let t = t_map_enclosure(&a.enclose(bits), theta)?;
                let one = BigReal::from_u64(1, bits);
                let ln_n = BigReal::from_u64(n, bits).ln()?;
                let damp = one.sub(&t).mul(&ln_n).exp();
                kappa.enclose(bits).mul(theta).mul(&damp).div(&t)
            }
        }
    }

    /// `φ_n′(θ)` on an enclosure of θ.
    pub fn derivative(&self, n: u64, theta: &BigReal) -> Result<BigReal> {
        let bits = theta.bits();
        match self {
            PerturbationFamily::Zero => Ok(BigReal::zero(bits)),
            PerturbationFamily::Sinusoid { kappa, delta } => {
                let nk = pow_enclosure(n, kappa, bits)?;
                let c = nk.mul(theta).cos();
                Ok(nk.mul(&c).mul(&neg_pow(n, delta, bits)?))
            }
            PerturbationFamily::PsShift { a, kappa } => {
                if *kappa.value() == 0 {
                    return Ok(BigReal::zero(bits));
                }
                self.check_theta(theta)?;
                let ln_a = a.enclose(bits).ln()?;
                let ln_t = theta.ln()?;
                let t = ln_a.div(&ln_t)?;
                let one = BigReal::from_u64(1, bits);
                let ln_n = BigReal::from_u64(n, bits).ln()?;
                let damp = one.sub(&t).mul(&ln_n).exp();
                let bracket = one.add(&ln_t).div(&ln_a)?.add(&ln_n.div(&ln_t)?);
                Ok(kappa.enclose(bits).mul(&damp).mul(&bracket))
            }
        }
    }

    /// Certified upper bound on `sup_{θ ∈ J̄} |φ_n(θ)|`.
    pub fn sup_abs(&self, n: u64, j: &OpenInterval, bits: u32) -> Result<Float> {
        self.sup_over(j, bits, |th| self.value(n, th))
    }

    /// Certified upper bound on `sup_{θ ∈ J̄} |φ_n′(θ)|`.
    pub fn sup_abs_derivative(&self, n: u64, j: &OpenInterval, bits: u32) -> Result<Float> {
        self.sup_over(j, bits, |th| self.derivative(n, th))
    }

    fn sup_over(&self, j: &OpenInterval, bits: u32, f: impl Fn(&BigReal) -> Result<BigReal>) -> Result<Float> {
        if matches!(self, PerturbationFamily::Zero) {
            return Ok(Float::with_val(bits, 0));
        }
        let mut best = Float::with_val(bits, 0);
        for piece in subdivide(j, SUP_PIECES, bits)? {
            let v = f(&piece)?.abs();
            if *v.hi() > best {
                best = v.hi().clone();
            }
        }
        Ok(best)
    }
}

/// Splits `J̄` into `k` closed enclosures covering it.
pub fn subdivide(j: &OpenInterval, k: u64, bits: u32) -> Result<Vec<BigReal>> {
    let len = j.length();
    (0..k)
        .map(|i| {
            let a = j.lo.value() + (&len * Rational::from((i, k))) ;
            let b = j.lo.value() + (&len * Rational::from((i + 1, k))) ;
            let lo = Float::with_val_round(bits, &a, Round::Down).0;
            let hi = Float::with_val_round(bits, &b, Round::Up).0;
            BigReal::from_endpoints(lo, hi)
        })
        .collect()
}

/// Exponent of the twist `ρ_n(θ) = γ n^{e}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TwistExponent {
    Fixed { alpha: ExactScalar },
    /// `e = t_a(θ)`
    ThetaDependent { a: ExactScalar },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwistFamily {
    None,
    PowerPhase { gamma: ExactScalar, exponent: TwistExponent },
}

impl TwistFamily {
    pub fn validate(&self) -> Result<()> {
        if let TwistFamily::PowerPhase { gamma, exponent } = self {
            if *gamma.value() == 0 {
                return Err(Error::Precondition("rho: gamma must be nonzero".into()));
            }
            if let TwistExponent::ThetaDependent { a } = exponent {
                if *a.value() <= 0 || *a.value() >= 1 {
                    return Err(Error::Precondition(format!("rho: a = {a} is not in (0,1)")));
                }
            }
        }
        Ok(())
    }

    /// `ρ_n(θ)` exactly, when θ-independent and rational.
    pub fn exact(&self, n: u64) -> Option<Rational> {
        match self {
            TwistFamily::PowerPhase { gamma, exponent: TwistExponent::Fixed { alpha } } => {
                exact_pow(n, alpha.value()).map(|p| Rational::from(gamma.value() * p))
            }
            _ => None,
        }
    }

    /// `ρ_n(θ)`; `t_a(θ)` may be supplied precomputed.
    pub fn value(&self, n: u64, theta: &BigReal, t: Option<&BigReal>) -> Result<Option<BigReal>> {
        let bits = theta.bits();
        match self {
            TwistFamily::None => Ok(None),
            TwistFamily::PowerPhase { gamma, exponent } => {
                let p = match exponent {
                    TwistExponent::Fixed { alpha } => pow_enclosure(n, alpha, bits)?,
                    TwistExponent::ThetaDependent { a } => {
                        let t = match t {
                            Some(t) => t.clone(),
                            None => t_map_enclosure(&a.enclose(bits), theta)?,
                        };
                        BigReal::from_u64(n, bits).ln()?.mul(&t).exp()
                    }
                };
                Ok(Some(gamma.enclose(bits).mul(&p)))
            }
        }
    }
}

fn split_args(s: &str, n: usize, what: &str) -> Result<Vec<String>> {
    // top-level commas only, so expressions like t(a,x) stay whole
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim().to_string());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim().to_string());
    if parts.len() != n {
        return Err(Error::Parse(format!("{what} expects {n} comma-separated values, got {s:?}")));
    }
    Ok(parts)
}

/// `power:c,sigma`, `const:c`, `table:v1;v2;…`
impl FromStr for PsiFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let out = match kind.trim() {
            "power" => {
                let p = split_args(args, 2, "psi power")?;
                PsiFamily::PowerLaw { c: p[0].parse()?, sigma: p[1].parse()? }
            }
            "const" => PsiFamily::ConstantBelowTenth { c: args.trim().parse()? },
            "table" => PsiFamily::Table {
                values: args.split(';').map(|v| v.parse()).collect::<Result<Vec<_>>>()?,
            },
            other => return Err(Error::Parse(format!("unknown psi family {other:?} (power, const, table)"))),
        };
        out.validate()?;
        Ok(out)
    }
}

/// `zero`, `sin:kappa,delta`, `psshift:a,kappa`
impl FromStr for PerturbationFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let out = match kind.trim() {
            "zero" => PerturbationFamily::Zero,
            "sin" => {
                let p = split_args(args, 2, "phi sin")?;
                PerturbationFamily::Sinusoid { kappa: p[0].parse()?, delta: p[1].parse()? }
            }
            "psshift" => {
                let p = split_args(args, 2, "phi psshift")?;
                PerturbationFamily::PsShift { a: p[0].parse()?, kappa: p[1].parse()? }
            }
            other => return Err(Error::Parse(format!("unknown phi family {other:?} (zero, sin, psshift)"))),
        };
        out.validate()?;
        Ok(out)
    }
}

/// `none`, `power:gamma,alpha`, `power-t:gamma,a`
impl FromStr for TwistFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let out = match kind.trim() {
            "none" => TwistFamily::None,
            "power" => {
                let p = split_args(args, 2, "rho power")?;
                TwistFamily::PowerPhase {
                    gamma: p[0].parse()?,
                    exponent: TwistExponent::Fixed { alpha: p[1].parse()? },
                }
            }
            "power-t" => {
                let p = split_args(args, 2, "rho power-t")?;
                TwistFamily::PowerPhase {
                    gamma: p[0].parse()?,
                    exponent: TwistExponent::ThetaDependent { a: p[1].parse()? },
                }
            }
            other => return Err(Error::Parse(format!("unknown rho family {other:?} (none, power, power-t)"))),
        };
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for PsiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFamily::PowerLaw { c, sigma } => write!(f, "power:{c},{sigma}"),
            PsiFamily::ConstantBelowTenth { c } => write!(f, "const:{c}"),
            PsiFamily::Table { values } => {
                let v: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "table:{}", v.join(";"))
            }
        }
    }
}

impl fmt::Display for PerturbationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationFamily::Zero => f.write_str("zero"),
            PerturbationFamily::Sinusoid { kappa, delta } => write!(f, "sin:{kappa},{delta}"),
            PerturbationFamily::PsShift { a, kappa } => write!(f, "psshift:{a},{kappa}"),
        }
    }
}

impl fmt::Display for TwistFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistFamily::None => f.write_str("none"),
            TwistFamily::PowerPhase { gamma, exponent: TwistExponent::Fixed { alpha } } => {
                write!(f, "power:{gamma},{alpha}")
            }
            TwistFamily::PowerPhase { gamma, exponent: TwistExponent::ThetaDependent { a } } => {
                write!(f, "power-t:{gamma},{a}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse::<ExactScalar>().unwrap().into_rational()
    }

    #[test]
    fn psi_values_and_clamp() {
        let psi: PsiFamily = "power:0.1,0.5".parse().unwrap();
        assert_eq!(psi.exact(4).unwrap(), Some(r("1/20")));
        assert_eq!(psi.exact(3).unwrap(), None);
        let v = psi.enclose(3, 128).unwrap();
        assert!((v.to_f64() - 0.1 / 3f64.sqrt()).abs() < 1e-16);
        let clamped: PsiFamily = "power:5,1".parse().unwrap();
        assert_eq!(clamped.exact(2).unwrap(), Some(r("1/20")));
        let irr: PsiFamily = "power:1/10,t(1/4,0.32)-1".parse().unwrap();
        assert!((irr.approx(100).unwrap() - 0.1 * 100f64.powf(-0.216_651_439_730_918)).abs() < 1e-15);
    }

    #[test]
    fn psi_validation() {
        assert!("const:0.2".parse::<PsiFamily>().is_err());
        assert!("const:0".parse::<PsiFamily>().is_err());
        assert!("power:-1,0.5".parse::<PsiFamily>().is_err());
        assert!("power:0.1,-0.5".parse::<PsiFamily>().is_err());
        assert!("power:0.1,0".parse::<PsiFamily>().is_ok());
        assert!("table:0.1;0.5".parse::<PsiFamily>().is_err());
        let t: PsiFamily = "table:0.1;0.05".parse().unwrap();
        assert!(t.exact(3).is_err());
        assert!("bogus:1".parse::<PsiFamily>().is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fams: Vec<PerturbationFamily> =
            vec!["sin:1/3,1/6".parse().unwrap(), "psshift:1/4,1".parse().unwrap(), "sin:0.7,-0.2".parse().unwrap()];
        let h = Rational::from((1, 1_000_000));
        for fam in &fams {
            for n in [1u64, 7, 50, 1000] {
                for th in ["0.31", "0.37", "0.44"] {
                    let t = r(th);
                    let at = |x: Rational| fam.value(n, &BigReal::from_rational(&x, 256)).unwrap().to_f64();
                    let fd = (at(Rational::from(&t + &h)) - at(Rational::from(&t - &h))) / (2.0 * h.to_f64());
                    let d = fam.derivative(n, &BigReal::from_rational(&t, 256)).unwrap().to_f64();
                    assert!((fd - d).abs() <= 1e-6 * (1.0 + d.abs()), "{fam} n={n} θ={th}: {fd} vs {d}");
                }
            }
        }
    }

    #[test]
    fn sup_bounds_dominate_samples() {
        let j: OpenInterval = "0.3,0.45".parse().unwrap();
        let fam: PerturbationFamily = "psshift:1/4,1".parse().unwrap();
        for n in [2u64, 100, 10_000] {
            let sup = fam.sup_abs(n, &j, 128).unwrap().to_f64();
            let dsup = fam.sup_abs_derivative(n, &j, 128).unwrap().to_f64();
            for k in 0..=20 {
                let th = j.lo.value() + Rational::from((3 * k, 400));
                let x = BigReal::from_rational(&th, 128);
                assert!(fam.value(n, &x).unwrap().abs().to_f64() <= sup);
                assert!(fam.derivative(n, &x).unwrap().abs().to_f64() <= dsup);
            }
        }
        let z = PerturbationFamily::Zero;
        assert_eq!(z.sup_abs(5, &j, 64).unwrap(), 0);
    }

    #[test]
    fn psshift_domain() {
        let fam: PerturbationFamily = "psshift:1/4,1".parse().unwrap();
        assert!(fam.value(3, &BigReal::from_rational(&r("0.2"), 64)).is_err());
        assert!("psshift:2,1".parse::<PerturbationFamily>().is_err());
    }

    #[test]
    fn twist_values() {
        let rho: TwistFamily = "power:1/2,2".parse().unwrap();
        assert_eq!(rho.exact(3), Some(r("9/2")));
        let t: TwistFamily = "power-t:1,1/4".parse().unwrap();
        let th = BigReal::from_rational(&r("1/2"), 128);
        let v = t.value(3, &th, None).unwrap().unwrap();
        assert!(v.contains(&r("9")));
        assert!("power:0,2".parse::<TwistFamily>().is_err());
        assert_eq!(TwistFamily::None.value(3, &th, None).unwrap(), None);
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["power:0.1,0.5", "const:0.09", "table:1/10;1/20", "zero", "sin:1/3,1/6", "psshift:1/4,1"] {
            let text = if s.starts_with("power") || s.starts_with("const") || s.starts_with("table") {
                s.parse::<PsiFamily>().unwrap().to_string()
            } else {
                s.parse::<PerturbationFamily>().unwrap().to_string()
            };
            assert_eq!(text, s);
        }
        let json = serde_json::to_string(&"power:0.1,0.5".parse::<PsiFamily>().unwrap()).unwrap();
        assert_eq!(json, r#"{"kind":"power_law","c":"0.1","sigma":"0.5"}"#);
    }
}
