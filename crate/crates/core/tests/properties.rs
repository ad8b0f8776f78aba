use proptest::prelude::*;

use krammer_core::closure::{closure_dimension, reduce_mod_p, ClosureBasis, PrimeFieldMatrix};
use krammer_core::krammer::tau;
use krammer_core::matrix::{format_rational, parse_rational, ratio};
use krammer_core::report::{CheckReport, Status};
use krammer_core::{build_system, CoxeterSystem, FactoredDiscriminant};

fn systems() -> Vec<CoxeterSystem> {
    ["A3", "A4", "D4", "D5", "E6"]
        .iter()
        .map(|t| build_system(t.parse().unwrap()).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_is_an_involution(k in 0usize..5, s in 0usize..200, u in 0usize..200) {
        let sys = &systems()[k];
        let (s, u) = (s % sys.len(), u % sys.len());
        prop_assert_eq!(sys.conjugate(s, sys.conjugate(s, u)), u);
        prop_assert_eq!(sys.commute(s, u), sys.conjugate(s, u) == u);
    }

    #[test]
    fn rationals_roundtrip(n in -10_000i64..10_000, d in 1i64..500) {
        let q = ratio(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }

    #[test]
    fn factored_strings_roundtrip(pairs in proptest::collection::btree_map(-40i64..40, 1usize..6, 1..5)) {
        let pairs: Vec<(i64, usize)> = pairs.into_iter().collect();
        let f = FactoredDiscriminant::from_pairs(&pairs);
        let g = FactoredDiscriminant::parse(&f.to_string()).unwrap();
        prop_assert_eq!(g.to_string(), f.to_string());
        prop_assert_eq!(g.expand(), f.expand());
    }

    #[test]
    fn echelon_invariant_and_membership(rows in proptest::collection::vec(proptest::collection::vec(0u8..19, 16), 1..12)) {
        let mut b = ClosureBasis::new(19, 4).unwrap();
        for r in &rows {
            b.insert(r);
            prop_assert!(b.check_invariant());
        }
        prop_assert!(b.dimension() <= 16);
        for r in &rows {
            prop_assert!(b.contains(r));
        }
    }

    #[test]
    fn closure_invariant_under_conjugation(seed in proptest::collection::vec(0u64..19, 9), m in 2i64..30) {
        prop_assume!(m % 19 != 0);
        let sys = build_system("A2".parse().unwrap()).unwrap();
        let gens: Vec<PrimeFieldMatrix> = sys
            .simple_indices()
            .iter()
            .map(|&s| reduce_mod_p(&tau(&sys, s, &ratio(m, 1)), 19).unwrap())
            .collect();
        let q = PrimeFieldMatrix::from_fn(19, 3, |i, j| seed[i * 3 + j]).unwrap();
        let Some(qi) = q.inverse() else { return Ok(()); };
        let conj: Vec<PrimeFieldMatrix> = gens.iter().map(|g| q.mul(g).mul(&qi)).collect();
        prop_assert_eq!(
            closure_dimension(&gens, None).unwrap().dimension,
            closure_dimension(&conj, None).unwrap().dimension
        );
    }

    #[test]
    fn closure_monotone(extra in 0usize..6, m in 2i64..18) {
        let sys = build_system("A3".parse().unwrap()).unwrap();
        let g = |s: usize| reduce_mod_p(&tau(&sys, s, &ratio(m, 1)), 19).unwrap();
        let small = vec![g(0)];
        let large = vec![g(0), g(extra)];
        prop_assert!(
            closure_dimension(&small, None).unwrap().dimension
                <= closure_dimension(&large, None).unwrap().dimension
        );
    }

    #[test]
    fn report_json_roundtrip(id in "[a-z]{1,10}", ms in proptest::collection::vec(-50i64..50, 0..4), el in 0u64..100_000) {
        let params = ms.iter().enumerate().map(|(k, m)| (format!("m{k}"), format_rational(&ratio(*m, 3)))).collect();
        let r = CheckReport {
            check_id: id,
            type_string: "D5".into(),
            params,
            status: Status::Fail,
            details: serde_json::json!({ "dimension": el, "ms": ms }),
            elapsed: el,
        };
        let line = r.to_json_line();
        let back = CheckReport::from_json_line(&line).unwrap();
        prop_assert_eq!(back.to_json_line(), line);
    }
}
