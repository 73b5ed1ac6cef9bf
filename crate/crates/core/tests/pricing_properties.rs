mod common;

use binopt::oracle::{oracle_american, oracle_european};
use binopt::pricing::{
    fair_value_american, fair_value_european, intrinsic_lattice, price_american, price_european,
    recommend, Recommendation,
};
use binopt::ExerciseStyle::{American, European};
use proptest::prelude::*;

proptest! {
    #[test]
    fn european_matches_path_sum(
        m in common::model(10, -0.3..0.5),
        is_call in any::<bool>(),
        k in 0.05f64..4.0,
    ) {
        let spec = common::vanilla(&m, is_call, European, k);
        let lattice = price_european(&m, &spec).unwrap().root();
        let oracle = oracle_european(&m, &spec).unwrap();
        prop_assert!((lattice - oracle).abs() <= 1e-10, "{} vs {}", lattice, oracle);
    }

    #[test]
    fn american_matches_best_stopping_rule(
        m in common::model(4, -0.3..0.5),
        is_call in any::<bool>(),
        k in 0.05f64..4.0,
    ) {
        let spec = common::vanilla(&m, is_call, American, k);
        let lattice = price_american(&m, &spec).unwrap().root();
        let oracle = oracle_american(&m, &spec).unwrap();
        prop_assert!((lattice - oracle).abs() <= 1e-10, "{} vs {}", lattice, oracle);
    }

    #[test]
    fn american_dominates_european_and_intrinsic(
        m in common::model(12, -0.3..0.5),
        is_call in any::<bool>(),
        k in 0.05f64..4.0,
    ) {
        let amer = price_american(&m, &common::vanilla(&m, is_call, American, k)).unwrap();
        let euro = price_european(&m, &common::vanilla(&m, is_call, European, k)).unwrap();
        let intrinsic = intrinsic_lattice(&m, &common::vanilla(&m, is_call, American, k)).unwrap();
        for (node, h) in amer.values.iter() {
            prop_assert!(*h >= euro.values[node]);
            prop_assert!(*h >= intrinsic[node]);
            if amer.exercise_flag(node) {
                prop_assert!(intrinsic[node] > 0.0 && *h == intrinsic[node]);
            }
        }
    }

    #[test]
    fn fair_value_never_exceeds_replication_price(
        m in common::model(8, -0.3..0.5),
        is_call in any::<bool>(),
        k in 0.05f64..4.0,
        p in 0.01f64..0.99,
    ) {
        let e = fair_value_european(&m, &common::vanilla(&m, is_call, European, k), p).unwrap();
        prop_assert!(e.fair_value <= e.q_price);
        prop_assert_eq!(e.fair_value, e.q_price.min(e.p_price));
        let a = fair_value_american(&m, &common::vanilla(&m, is_call, American, k), p).unwrap();
        prop_assert!(a.fair_value <= a.q_price);
        prop_assert_eq!(a.fair_value, a.q_price.min(a.p_price));
    }

    #[test]
    fn advice_is_a_strict_comparison(
        intrinsic in 0.0f64..5.0,
        v0 in 0.0f64..3.0,
        r in 0.0f64..0.3,
        n in 0usize..6,
    ) {
        let benchmark = v0 * (1.0 + r).powi(n as i32);
        let rec = recommend(intrinsic, v0, r, n);
        prop_assert_eq!(rec == Recommendation::Exercise, intrinsic > benchmark + 1e-12);
        prop_assert_eq!(rec == Recommendation::Hold, intrinsic < benchmark - 1e-12);
    }
}
