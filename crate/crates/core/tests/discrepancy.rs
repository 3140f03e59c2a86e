use dioph_core::discrepancy::{count_in_interval, erdos_turan_bound, paper_h, reduce_mod_1, verify_lemma};
use dioph_core::interval::OpenInterval;
use dioph_core::numeric::{PrecisionPolicy, RealExpr};
use dioph_core::Error;

fn e(s: &str) -> RealExpr {
    s.parse().unwrap()
}

fn j(s: &str) -> OpenInterval {
    s.parse().unwrap()
}

#[test]
fn wrapping_intervals_split() {
    assert_eq!(reduce_mod_1(&j("0.8,1.3")).len(), 2);
    assert_eq!(reduce_mod_1(&j("0.1,0.4")).len(), 1);
}

#[test]
fn golden_ratio_count_and_bound() {
    let pol = PrecisionPolicy::default();
    let r = erdos_turan_bound(&e("(1+sqrt(5))/2"), 10_000, &j("0,0.1"), 20, &pol).unwrap();
    assert_eq!(r.count, 1000);
    assert!((r.bound - 2064.1856930099444).abs() < 1e-9);
    assert!(!r.violated);
}

#[test]
fn lemma_holds_for_every_admissible_h() {
    let pol = PrecisionPolicy::default();
    for alpha in ["sqrt(2)", "sqrt(3)", "19/7"] {
        let reports = verify_lemma(&e(alpha), 1000, &j("0.3,0.4"), 50, &pol).unwrap();
        assert!(!reports.is_empty());
        assert!(reports.iter().all(|r| !r.violated));
    }
    // 7·(19/7) is an integer, so H stops at 6
    assert_eq!(verify_lemma(&e("19/7"), 100, &j("0,0.5"), 50, &pol).unwrap().len(), 6);
}

#[test]
fn integer_multiples_are_reported() {
    let pol = PrecisionPolicy::default();
    assert_eq!(erdos_turan_bound(&e("1/2"), 4, &j("-0.01,0.49"), 2, &pol).unwrap_err(), Error::IntegerMultiple { h: 2 });
    assert_eq!(count_in_interval(&e("1/3"), 9, &j("0,0.5"), &pol).unwrap(), 6);
}

#[test]
fn paper_h_is_inverse_length() {
    assert_eq!(paper_h(&j("0,0.1")), 10);
    assert_eq!(paper_h(&j("0,3")), 1);
}
