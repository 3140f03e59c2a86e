use dioph_core::numeric::{
    ceil_root, floor_pow, inverse_mod, is_member, mod_inverse, t_map, ExactScalar, PrecisionPolicy, RealExpr,
};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};

fn s(x: &str) -> ExactScalar {
    x.parse().unwrap()
}

#[test]
fn mod_inverse_round_trips_below_100() {
    for p in (3u64..100).filter(|&p| dioph_core::numeric::is_prime(p)) {
        for q in 1..p as i64 {
            assert_eq!(mod_inverse(q, p).unwrap() as i64 * q % p as i64, 1, "q = {q}, p = {p}");
        }
    }
}

#[test]
fn half_integer_powers_match_integer_roots() {
    let pol = PrecisionPolicy::default();
    for n in 1..2000u64 {
        let exact = Integer::from(n.pow(3)).sqrt();
        assert_eq!(floor_pow(n, &s("3/2"), &pol).unwrap(), exact, "n = {n}");
    }
}

#[test]
fn t_map_is_increasing_and_hits_two_at_sqrt_a() {
    let a = s("1/4");
    assert_eq!(t_map(&a, &s("1/2"), 128).unwrap().to_f64(), 2.0);
    let mut prev = 0.0;
    for k in 26..100 {
        let t = t_map(&a, &ExactScalar::ratio(k, 100), 128).unwrap().to_f64();
        assert!(t > prev);
        prev = t;
    }
}

#[test]
fn expressions_enclose_their_value() {
    let e: RealExpr = "sqrt(2) + 1/3".parse().unwrap();
    let v = e.enclose(200).unwrap();
    assert!((v.to_f64() - (2f64.sqrt() + 1.0 / 3.0)).abs() < 1e-15);
    assert!(v.radius() < 1e-55);
}

proptest! {
    #[test]
    fn membership_agrees_with_enumeration(alpha_num in 11u32..40, y in 1u64..3000) {
        let alpha = ExactScalar::from_rational(Rational::from((alpha_num, 10)));
        let pol = PrecisionPolicy::default();
        let y = Integer::from(y);
        let k = ceil_root(&y, &alpha, &pol).unwrap();
        let listed = (1..=k).any(|j| floor_pow(j, &alpha, &pol).unwrap() == y);
        prop_assert_eq!(is_member(&y, &alpha, &pol).unwrap(), listed);
    }

    #[test]
    fn inverse_mod_inverts(a in -1000i64..1000, m in 2u64..500) {
        match inverse_mod(a, m) {
            Some(inv) => prop_assert_eq!((a.rem_euclid(m as i64) * inv as i64) % m as i64, 1),
            None => prop_assert!(dioph_core::numeric::gcd(a.unsigned_abs(), m) != 1),
        }
    }

    #[test]
    fn integer_exponents_are_exact(n in 1u64..10_000, e in 1u32..4) {
        let got = floor_pow(n, &ExactScalar::from_int(e as i64), &PrecisionPolicy::default()).unwrap();
        prop_assert_eq!(got, Integer::from(n).pow(e));
    }
}
