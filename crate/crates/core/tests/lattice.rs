use dioph_core::lattice::{
    count_basic, count_basic_congruence, count_basic_oracle, count_perturbed, count_perturbed_oracle, LatticeQuery,
    QsetSpec, DEFAULT_WORK_CAP,
};
use dioph_core::numeric::PrecisionPolicy;
use dioph_core::Error;
use proptest::prelude::*;

fn query(p: u64, big_q: u64, qset: &str, l: &str, j: &str, phi: Option<&str>) -> LatticeQuery {
    let qs: QsetSpec = qset.parse().unwrap();
    LatticeQuery::new(p, big_q, qs.resolve(p, big_q), l.parse().unwrap(), j.parse().unwrap(), phi.map(|f| f.parse().unwrap()))
        .unwrap()
}

#[test]
fn small_example_has_five_tuples() {
    let q = query(3, 4, "4", "1", "0,2", None);
    let pol = PrecisionPolicy::default();
    assert_eq!(count_basic(&q, &pol).unwrap().count, 5);
    assert_eq!(count_basic_oracle(&q, &pol, DEFAULT_WORK_CAP).unwrap(), 5);
}

#[test]
fn invalid_queries_are_rejected() {
    let l = "1".parse().unwrap();
    let j = "0,1".parse().unwrap();
    assert!(matches!(LatticeQuery::new(9, 10, vec![10], l, j, None), Err(Error::InvalidQuery(_))));
    let l = "1".parse().unwrap();
    let j = "0,1".parse().unwrap();
    assert!(matches!(LatticeQuery::new(5, 6, vec![10], l, j, None), Err(Error::InvalidQuery(_))));
}

#[test]
fn irrational_l_matches_the_oracle() {
    let q = query(7, 20, "band", "sqrt(5)", "0.1,0.8", None);
    let pol = PrecisionPolicy::default();
    assert_eq!(count_basic(&q, &pol).unwrap().count, count_basic_oracle(&q, &pol, DEFAULT_WORK_CAP).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn three_counts_agree(pi in 0usize..4, extra in 1u64..12, l in 1u64..6, lo in 0i64..10, len in 1i64..10) {
        let p = [3u64, 5, 7, 11][pi];
        let big_q = p + extra;
        let j = format!("{}/10,{}/10", lo - 5, lo - 5 + len);
        let q = query(p, big_q, "band", &l.to_string(), &j, None);
        let pol = PrecisionPolicy::default();
        let closed = count_basic(&q, &pol).unwrap().count;
        prop_assert_eq!(closed, count_basic_congruence(&q, &pol).unwrap());
        prop_assert_eq!(closed, count_basic_oracle(&q, &pol, DEFAULT_WORK_CAP).unwrap());
    }

    #[test]
    fn perturbed_counts_match_the_oracle(extra in 1u64..10, l in 1u64..4) {
        let q = query(5, 5 + extra, "band", &l.to_string(), "0.2,0.9", Some("sin:1/3,1/6"));
        let pol = PrecisionPolicy::default();
        prop_assert_eq!(count_perturbed(&q, &pol).unwrap().count, count_perturbed_oracle(&q, &pol, DEFAULT_WORK_CAP).unwrap());
    }
}
