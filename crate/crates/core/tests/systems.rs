use dioph_core::numeric::{ExactScalar, PrecisionPolicy};
use dioph_core::systems::{solve_system, survey_measure, SolveOptions, SurveyOptions, SystemInstance};

fn inst(j: &str, psi: &str, phi: &str, rho: &str) -> SystemInstance {
    SystemInstance::new(j.parse().unwrap(), psi.parse().unwrap(), phi.parse().unwrap(), rho.parse().unwrap(), "0,1".parse().unwrap())
        .unwrap()
}

#[test]
fn rational_theta_solves_on_multiples_of_the_denominator() {
    let i = inst("0,1", "power:0.1,0.5", "zero", "none");
    let sols = solve_system(&i, &"1/3".parse().unwrap(), 1, 30, usize::MAX, SolveOptions::default(), &PrecisionPolicy::default())
        .unwrap();
    assert_eq!(sols.iter().map(|r| r.n).collect::<Vec<_>>(), (1..=10).map(|k| 3 * k).collect::<Vec<_>>());
}

#[test]
fn instances_round_trip_through_json() {
    let i = inst("0.3,0.45", "power:0.1,0.2", "psshift:1/4,1", "power-t:1,1/4");
    let back = SystemInstance::from_json(&i.to_json()).unwrap();
    assert_eq!(back, i);
}

#[test]
fn surveys_are_seeded() {
    let i = inst("0,1", "power:1,0.5", "zero", "none");
    let opts = SurveyOptions { samples: 6, n_max: 500, min_hits: 1, seed: 11, stratified: false, primes_only: false };
    let pol = PrecisionPolicy::default();
    let a = survey_measure(&i, &opts, &pol).unwrap();
    let b = survey_measure(&i, &opts, &pol).unwrap();
    assert_eq!(a, b);
    let c = survey_measure(&i, &SurveyOptions { seed: 12, ..opts }, &pol).unwrap();
    assert_ne!(a.per_sample[0].theta, c.per_sample[0].theta);
}

#[test]
fn primes_only_keeps_prime_solutions() {
    let i = inst("0,1", "power:0.1,0.5", "zero", "none");
    let theta: ExactScalar = "1/2".parse().unwrap();
    let pol = PrecisionPolicy::default();
    let all = solve_system(&i, &theta, 1, 40, usize::MAX, SolveOptions::default(), &pol).unwrap();
    let primes = solve_system(&i, &theta, 1, 40, usize::MAX, SolveOptions { primes_only: true }, &pol).unwrap();
    assert_eq!(all.len(), 20);
    assert_eq!(primes.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2]);
}
