mod common;

use common::{e, interval, kernel, random_element, random_interval, random_kernels, EXACT_KERNELS};
use lattice_riemann::{
    antiderivative, extrema, mvt_integral_solve, verify_ftc1, Element, OrderInterval,
    ToleranceSchedule, VerifyOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NONNEGATIVE_KERNELS: &[&str] = &["t^2", "exp(t)", "1/(t^2 + 1)", "abs(sin(t))", "sin(t) + 1"];

fn sched() -> ToleranceSchedule {
    ToleranceSchedule::new(1e-4, 16).unwrap()
}

fn point_in(rng: &mut ChaCha8Rng, i: &OrderInterval) -> Element {
    Element::new(
        (0..i.dim())
            .map(|a| i.lo().get(a) + rng.gen::<f64>() * i.width().get(a))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn mvt_point_lies_between_the_endpoints(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, f) = random_kernels(&mut rng, dim, EXACT_KERNELS);
        let x = random_element(&mut rng, dim, -2.0, 2.0);
        let y = random_element(&mut rng, dim, -2.0, 2.0);
        let sol = mvt_integral_solve(&f, &x, &y, 1e-9, &sched()).unwrap();
        let span = OrderInterval::spanned_by(&x, &y).unwrap();
        prop_assert!(span.contains(&sol.c).unwrap(), "{:?} not in {:?}", sol.c, span);
        prop_assert!(sol.residual.coords().iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn antiderivative_is_monotone_for_nonnegative_kernels(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, f) = random_kernels(&mut rng, dim, NONNEGATIVE_KERNELS);
        let i = random_interval(&mut rng, dim, -2.0, 2.0);
        let s = sched();
        let prim = antiderivative(&f, &i, &s).unwrap();
        for _ in 0..20 {
            let x = point_in(&mut rng, &i);
            let z = point_in(&mut rng, &i);
            let y = x.sup(&z).unwrap();
            let (fx, fy) = (prim.eval(&x).unwrap(), prim.eval(&y).unwrap());
            for a in 0..dim {
                prop_assert!(fx.get(a) <= fy.get(a) + 2.0 * s.tol);
            }
        }
    }

    #[test]
    fn antiderivative_is_lipschitz(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, f) = random_kernels(&mut rng, dim, EXACT_KERNELS);
        let i = random_interval(&mut rng, dim, -2.0, 2.0);
        let s = sched();
        let prim = antiderivative(&f, &i, &s).unwrap();
        let ext = extrema(&f, &i, 0.0).unwrap();
        let k = ext.m.abs().sup(&ext.big_m.abs()).unwrap();
        for _ in 0..20 {
            let x = point_in(&mut rng, &i);
            let y = point_in(&mut rng, &i);
            let d = prim.eval(&x).unwrap().sub(&prim.eval(&y).unwrap()).unwrap().abs();
            let bound = k.mul(&x.sub(&y).unwrap().abs()).unwrap();
            for a in 0..dim {
                prop_assert!(d.get(a) <= bound.get(a) + 2.0 * s.tol);
            }
        }
    }
}

#[test]
fn ftc1_residuals_shrink_with_tolerance_and_step() {
    let levels = [(1e-2, 10.0), (1e-3, 1.0), (1e-4, 0.1)];
    for src in ["t^2", "sin(t)", "exp(t) - t^3"] {
        let f = kernel(src, 2);
        let i = interval(&[0.0, -1.0], &[1.0, 1.0]);
        let residuals: Vec<Element> = levels
            .iter()
            .map(|&(tol, step_scale)| {
                let opts = VerifyOptions {
                    samples: 10,
                    tol: 1.0,
                    seed: 3,
                    sched: ToleranceSchedule::new(tol, 22).unwrap(),
                    step_scale,
                };
                verify_ftc1(&f, &i, &opts).unwrap().max_residual
            })
            .collect();
        for w in residuals.windows(2) {
            for a in 0..2 {
                assert!(w[1].get(a) <= 1.1 * w[0].get(a), "{src}: {residuals:?}");
            }
        }
    }
}

#[test]
fn mvt_on_a_mixed_pair_keeps_equal_atoms_fixed() {
    let f = kernel("t^2", 3);
    let sol = mvt_integral_solve(
        &f,
        &e(&[0.0, 0.4, 1.0]),
        &e(&[1.0, 0.4, 0.0]),
        1e-10,
        &sched(),
    )
    .unwrap();
    let c = 3f64.sqrt().recip();
    assert!((sol.c.get(0) - c).abs() < 1e-6 && (sol.c.get(2) - c).abs() < 1e-6);
    assert_eq!(sol.c.get(1), 0.4);
}
