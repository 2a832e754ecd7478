//! Algebraic invariants checked on randomly generated inputs.

use efgl_core::equivariant::crt::{crt_decompose, interpolate, random_input};
use efgl_core::equivariant::tate::efgl_from_tate;
use efgl_core::equivariant::{Section, SplitEfgl};
use efgl_core::fgl::fgl_multiplicative;
use efgl_core::report::{CheckResult, Report, Status};
use efgl_core::ring::{Ring, RingDoc};
use efgl_core::scenario::{Scenario, BUNDLED};
use efgl_core::series::{Precision, TruncatedSeries};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

const CAP: u32 = 4;

fn model() -> &'static SplitEfgl {
    static MODEL: OnceLock<SplitEfgl> = OnceLock::new();
    MODEL.get_or_init(|| efgl_from_tate(2, 1, CAP, &["-1".to_string()]).unwrap())
}

/// Small integer combinations of the named generators.
fn section_expr() -> impl Strategy<Value = String> {
    let atoms = prop::sample::select(vec!["1", "x", "x_alpha", "e0", "e1", "t", "f1", "x^2", "s*x", "q*e1", "x*x_alpha"]);
    prop::collection::vec((-3i64..=3, atoms), 1..4)
        .prop_map(|terms| terms.iter().map(|(c, a)| format!("({c})*{a}")).collect::<Vec<_>>().join(" + "))
}

fn section(expr: &str) -> Section {
    model().eval(expr, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sections_form_a_commutative_ring(a in section_expr(), b in section_expr(), c in section_expr()) {
        let (a, b, c) = (section(&a), section(&b), section(&c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn coproduct_is_multiplicative(a in section_expr(), b in section_expr()) {
        let m = model();
        let (a, b) = (section(&a), section(&b));
        let lhs = m.coproduct(&(&a * &b)).unwrap();
        let rhs = &m.coproduct(&a).unwrap() * &m.coproduct(&b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn coproduct_is_coassociative_and_cocommutative(a in section_expr()) {
        let m = model();
        let psi = m.coproduct(&section(&a)).unwrap();
        prop_assert_eq!(m.coproduct_on_tensor(&psi, true).unwrap(), m.coproduct_on_tensor(&psi, false).unwrap());
        prop_assert_eq!(m.swap(&psi).unwrap(), psi);
    }

    #[test]
    fn counit_recovers_the_section(a in section_expr()) {
        let m = model();
        let a = section(&a);
        let psi = m.coproduct(&a).unwrap();
        prop_assert_eq!(m.evaluate_slot(&psi, 1, 0).unwrap(), a.clone());
        prop_assert_eq!(m.evaluate_slot(&psi, 0, 0).unwrap(), a);
    }

    #[test]
    fn crt_recombines(seed in any::<u64>(), iterations in 1usize..4) {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_input(m, 1, &mut rng).unwrap();
        let d = crt_decompose(m, 1, &u, iterations).unwrap();
        prop_assert!(d.recombines);
        prop_assert!(d.residual_order().is_none_or(|o| o >= iterations as u32));
    }

    #[test]
    fn interpolation_hits_the_values(a in -5i64..5, b in -5i64..5, shift in -3i64..3) {
        let r = Ring::from_doc(&RingDoc::new("Z").var("q").invert("q")).unwrap();
        let q = r.var("q").unwrap();
        let nodes = [r.int(shift), &r.int(shift) - &q.pow(2)];
        let values = [r.int(a), &r.int(b) * &q];
        let coeffs = interpolate(&r, &nodes, &values).unwrap();
        for (node, value) in nodes.iter().zip(&values) {
            let at = coeffs.iter().rev().fold(r.zero(), |acc, c| &(&acc * node) + c);
            prop_assert_eq!(&at, value);
        }
    }

    #[test]
    fn multiplicative_law_evaluates_exactly(a in -20i64..20, b in -20i64..20) {
        let z = Ring::from_doc(&RingDoc::new("Z")).unwrap();
        let law = fgl_multiplicative(&z, 4);
        prop_assert_eq!(law.evaluate(&z.int(a), &z.int(b)).unwrap(), z.int(a + b + a * b));
    }

    #[test]
    fn series_reversion_is_an_inverse(c2 in -4i64..4, c3 in -4i64..4) {
        let z = Ring::from_doc(&RingDoc::new("Z")).unwrap();
        let f = TruncatedSeries::univariate(&z, "z", 7, &[z.zero(), z.one(), z.int(c2), z.int(c3)]);
        let g = f.reverse().unwrap();
        let id = TruncatedSeries::variable(&z, &["z"], Precision::total(1, 7), 0);
        prop_assert_eq!(f.compose(std::slice::from_ref(&g)).unwrap(), id.clone());
        prop_assert_eq!(g.compose(&[f]).unwrap(), id);
    }

    #[test]
    fn status_combination_is_order_independent(statuses in prop::collection::vec(0u8..3, 0..6)) {
        let as_status = |k: &u8| [Status::Pass, Status::Fail, Status::Undecided][*k as usize];
        let forward = Status::combine(statuses.iter().map(as_status));
        let backward = Status::combine(statuses.iter().rev().map(as_status));
        prop_assert_eq!(forward, backward);
        prop_assert_eq!(forward == Status::Pass, statuses.iter().all(|k| *k == 0));
    }

    #[test]
    fn checksum_ignores_duration(d1 in any::<u64>(), d2 in any::<u64>(), residual in "[0-9a-z +*-]{1,12}") {
        let checks = vec![CheckResult::residual("r", residual)];
        let a = Report::new(serde_json::json!({"name": "p"}), checks.clone(), d1);
        let b = Report::new(serde_json::json!({"name": "p"}), checks, d2);
        prop_assert_eq!(a.checksum, b.checksum);
    }
}

#[test]
fn bundled_scenarios_roundtrip_through_json() {
    for b in BUNDLED {
        let s = Scenario::from_json(b.json).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s, "{}", b.name);
    }
}
