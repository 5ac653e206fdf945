use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphbv::expansion::Expansion;
use sphbv::poisson::{growth_classify_expansion, poisson_kernel, poisson_kernel_ru, poisson_transform};
use sphbv::weights::WeightSequence;

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (r > 1e-3).then(|| v.iter().map(|x| x / r).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_positive_inside_ball(n in 2usize..=5, r in 0.0f64..0.999, u in -1.0f64..=1.0) {
        prop_assert!(poisson_kernel_ru(n, r, u) > 0.0);
    }

    #[test]
    fn kernel_depends_only_on_r_and_angle(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 3),
        r in 0.0f64..0.95,
    ) {
        let (Some(p), Some(xi)) = (unit(&a), unit(&b)) else { return Ok(()) };
        let x: Vec<f64> = p.iter().map(|v| v * r).collect();
        let u: f64 = p.iter().zip(&xi).map(|(s, t)| s * t).sum();
        let direct = poisson_kernel(&x, &xi).unwrap();
        let ru = poisson_kernel_ru(3, r, u.clamp(-1.0, 1.0));
        prop_assert!((direct - ru).abs() <= 1e-9 * ru.max(1.0));
    }

    #[test]
    fn mean_value_at_origin(seed in any::<u64>(), n in 2usize..=4, jmax in 0usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = Expansion::random(n, jmax, &mut rng).unwrap();
        let mut omega = vec![0.0; n];
        omega[0] = 1.0;
        let v = poisson_transform(&e, 0.0, &omega).unwrap().value;
        let f0 = e.coeffs_of(0).unwrap()[0] * e.basis(0).unwrap().eval(0, &omega);
        prop_assert!((v - f0).abs() <= 1e-12);
    }

    #[test]
    fn poisson_transform_is_linear(
        seed in any::<u64>(),
        lambda in -3.0f64..3.0,
        r in 0.0f64..0.9,
        dir in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let Some(omega) = unit(&dir) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Expansion::random(3, 4, &mut rng).unwrap();
        let g = Expansion::random(3, 4, &mut rng).unwrap();
        let lhs = poisson_transform(&f.scale(lambda).add(&g).unwrap(), r, &omega).unwrap().value;
        let rhs = lambda * poisson_transform(&f, r, &omega).unwrap().value
            + poisson_transform(&g, r, &omega).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn expansion_json_roundtrip(seed in any::<u64>(), n in 2usize..=4, jmax in 0usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = Expansion::random(n, jmax, &mut rng).unwrap();
        let back = Expansion::from_json(&e.to_json()).unwrap();
        prop_assert_eq!(e.to_json(), back.to_json());
    }

    #[test]
    fn weight_json_roundtrip(s in 0.5f64..3.0) {
        let w = WeightSequence::gevrey(s, 64).unwrap();
        let back = WeightSequence::from_json(&w.to_json()).unwrap();
        for p in 0..=64 {
            prop_assert!((w.log_m(p) - back.log_m(p)).abs() <= 1e-12 * (1.0 + w.log_m(p).abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn growth_verdict_is_scale_invariant(lambda in 1e-3f64..1e3) {
        let e = Expansion::delta(3, &[0.0, 0.0, 1.0], 12).unwrap();
        let w = WeightSequence::factorial(200).unwrap();
        let a = growth_classify_expansion(&e, &w).unwrap().verdict;
        let b = growth_classify_expansion(&e.scale(lambda), &w).unwrap().verdict;
        prop_assert_eq!(a, b);
    }
}
