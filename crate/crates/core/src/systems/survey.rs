use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::{solve_with, Evaluator, PsiCache, SolveOptions, SystemInstance};
use crate::error::{Error, Result};
use crate::interval::OpenInterval;
use crate::numeric::{ExactScalar, PrecisionPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyOptions {
    pub samples: u64,
    pub n_max: u64,
    pub min_hits: u64,
    pub seed: u64,
    /// one draw per equal-width stratum of J instead of i.i.d. draws
    pub stratified: bool,
    pub primes_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub index: u64,
    /// exact sampled value
    pub theta: String,
    pub theta_approx: f64,
    /// number of solutions `n <= n_max`; absent if the sample is indeterminate
    pub hits: Option<u64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub options: SurveyOptions,
    pub determinate: u64,
    pub indeterminate: u64,
    /// share of determinate samples with at least `min_hits` solutions
    pub fraction: Option<f64>,
    pub median_hits: Option<f64>,
    pub per_sample: Vec<SampleOutcome>,
}

/// θ for sample `index`: its own ChaCha stream of the master seed, mapped to
/// the midpoint of a 2^-64 grid cell of J (or of its stratum).
pub fn sample_theta(j: &OpenInterval, index: u64, samples: u64, seed: u64, stratified: bool) -> ExactScalar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let k: u64 = rng.gen();
    let mut u = Rational::from((Integer::from(k) * 2u32 + 1u32, Integer::from(1u32) << 65u32));
    if stratified {
        u = (u + index) / samples;
    }
    let theta = j.lo.value() + (j.length() * u) ;
    ExactScalar::Rational(theta)
}

/// Fraction of sampled θ ∈ J with at least `min_hits` solutions up to `n_max`.
pub fn survey_measure(inst: &SystemInstance, opts: &SurveyOptions, policy: &PrecisionPolicy) -> Result<SurveyReport> {
    if opts.samples == 0 {
        return Err(Error::Precondition("samples must be >= 1".into()));
    }
    if opts.n_max == 0 {
        return Err(Error::Precondition("n_max must be >= 1".into()));
    }
    inst.validate()?;
    let cache = PsiCache::build(&inst.psi, opts.n_max, policy.start_bits)?;
    let solve = SolveOptions { primes_only: opts.primes_only };

    let runs: Vec<(ExactScalar, Result<u64>)> = (0..opts.samples)
        .into_par_iter()
        .map(|index| {
            let theta = sample_theta(&inst.j, index, opts.samples, opts.seed, opts.stratified);
            let run = Evaluator::new(inst, &theta, policy)
                .and_then(|ev| solve_with(&ev.with_cache(&cache), 1, opts.n_max, usize::MAX, solve))
                .map(|sols| sols.len() as u64);
            (theta, run)
        })
        .collect();

    let mut per_sample = Vec::with_capacity(runs.len());
    for (index, (theta, run)) in (0u64..).zip(runs) {
        let (hits, error) = match run {
            Ok(h) => (Some(h), None),
            // ambiguity marks the sample indeterminate; anything else is a real error
            Err(e) if e.is_ambiguity() => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        per_sample.push(SampleOutcome { index, theta: theta.to_string(), theta_approx: theta.to_f64(), hits, error });
    }

    let mut hits: Vec<u64> = per_sample.iter().filter_map(|s| s.hits).collect();
    let determinate = hits.len() as u64;
    let good = hits.iter().filter(|&&h| h >= opts.min_hits).count() as u64;
    hits.sort_unstable();
    let median_hits = median(&hits);
    Ok(SurveyReport {
        options: *opts,
        determinate,
        indeterminate: opts.samples - determinate,
        fraction: (determinate > 0).then(|| good as f64 / determinate as f64),
        median_hits,
        per_sample,
    })
}

fn median(sorted: &[u64]) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    Some(if n % 2 == 1 { sorted[n / 2] as f64 } else { (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0 })
}
