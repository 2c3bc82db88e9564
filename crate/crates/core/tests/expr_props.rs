mod common;

use common::{random_expr, random_smooth_expr};
use lattice_riemann::{differentiate, eval_expr, parse, print_expr};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>(), depth in 0u32..6) {
        let e = random_expr(&mut ChaCha8Rng::seed_from_u64(seed), depth);
        let printed = print_expr(&e);
        prop_assert_eq!(parse(&printed).unwrap(), e, "{}", printed);
    }

    #[test]
    fn parse_errors_point_inside_the_input(src in "[t0-9.+*/^() sinco-]{0,16}") {
        if let Err(err) = parse(&src) {
            prop_assert!(err.offset <= src.len());
            prop_assert!(!err.expected.is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_matches_central_differences(seed in any::<u64>(), t in -2.0..2.0f64) {
        let e = random_smooth_expr(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        let d = differentiate(&e).unwrap();
        let h = 1e-6;
        let fd = (eval_expr(&e, t + h).unwrap() - eval_expr(&e, t - h).unwrap()) / (2.0 * h);
        let exact = eval_expr(&d, t).unwrap();
        let scale = 1.0 + exact.abs().max(eval_expr(&e, t).unwrap().abs());
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "{}: {} vs {}", print_expr(&e), fd, exact);
    }
}
