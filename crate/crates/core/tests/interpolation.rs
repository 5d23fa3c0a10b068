use ego_bounds::interpolate::sample_rkhs;
use ego_bounds::{BoxDomain, Design, KernelSpec, Posterior, SampleMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.3f64..1.5).prop_map(|l| KernelSpec::se(l).unwrap()),
        (0usize..4, 0.3f64..1.5).prop_map(|(i, rho)| KernelSpec::matern(
            [0.5, 1.5, 2.5, 3.5][i],
            rho,
            1.0
        )
        .unwrap()),
    ]
}

fn points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect()
}

// lambda_min / lambda_max of the Gram matrix, from an independent eigensolver.
fn inverse_condition(kernel: &KernelSpec, xs: &[Vec<f64>]) -> f64 {
    let n = xs.len();
    let gram = nalgebra::DMatrix::from_fn(n, n, |i, j| kernel.eval(&xs[i], &xs[j]).unwrap());
    let eig = gram.symmetric_eigenvalues();
    eig.min() / eig.max()
}

fn check_grid(d: usize, m: usize) -> Vec<Vec<f64>> {
    let dom = BoxDomain::unit(d).unwrap();
    let per = (m as f64).powf(1.0 / d as f64).ceil() as usize;
    (0..per.pow(d as u32))
        .map(|i| ego_bounds::search::search_point(&dom, per, i))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn envelope_contains_ball_functions(
        kernel in kernel_strategy(),
        seed in any::<u64>(),
        n in 1usize..15,
        d in 1usize..3,
    ) {
        let dom = BoxDomain::unit(d).unwrap();
        let f = sample_rkhs(kernel, &dom, 10, 1.0, seed, SampleMode::Rescale).unwrap().function;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let xs = points(&mut rng, n, d);
        // Below this the posterior variance sits under double-precision
        // cancellation in k(x,x) - |L^-1 k|^2 and cannot be resolved to 1e-6.
        prop_assume!(inverse_condition(&kernel, &xs) > 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x| f.eval(x).unwrap()).collect();
        let post = match Posterior::fit(kernel, Design::new(xs, ys).unwrap(), 1.0) {
            Ok(p) => p,
            Err(ego_bounds::Error::IllConditioned(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for x in check_grid(d, 200) {
            let (lo, hi) = post.envelope(1.0, &x).unwrap();
            let v = f.eval(&x).unwrap();
            prop_assert!(lo - 1e-6 <= v && v <= hi + 1e-6, "{lo} <= {v} <= {hi} at {x:?}, jitter {}", post.jitter_used());
        }
    }

    #[test]
    fn norm_splits_into_interpolant_and_residual(
        kernel in kernel_strategy(),
        seed in any::<u64>(),
        n in 1usize..10,
    ) {
        let dom = BoxDomain::unit(2).unwrap();
        let f = sample_rkhs(kernel, &dom, 12, 1.0, seed, SampleMode::Rescale).unwrap().function;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let xs = points(&mut rng, n, 2);
        let ys: Vec<f64> = xs.iter().map(|x| f.eval(x).unwrap()).collect();
        let post = Posterior::fit_unbounded(kernel, Design::new(xs, ys).unwrap()).unwrap();
        prop_assume!(post.jitter_used() == 0.0);
        let m = post.mean_function();
        let residual = f.combine(1.0, &m, -1.0).unwrap();
        let lhs = f.norm().powi(2);
        let rhs = m.norm().powi(2) + residual.norm().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-6 * lhs.max(1e-12), "{lhs} vs {rhs}");
        prop_assert!((m.norm().powi(2) - post.norm_sq()).abs() <= 1e-8);
    }

    #[test]
    fn std_never_increases_with_more_data(
        kernel in kernel_strategy(),
        seed in any::<u64>(),
        n in 1usize..12,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = points(&mut rng, n + 1, 1);
        prop_assume!(inverse_condition(&kernel, &xs) > 1e-12);
        let small = Posterior::fit_unbounded(kernel, Design::zeros(xs[..n].to_vec()).unwrap()).unwrap();
        let big = Posterior::fit_unbounded(kernel, Design::zeros(xs).unwrap()).unwrap();
        // Jitter inflates the variance by about sqrt(jitter); compare exact fits only.
        prop_assume!(small.jitter_used() == 0.0 && big.jitter_used() == 0.0);
        for x in check_grid(1, 101) {
            prop_assert!(big.std(&x).unwrap() <= small.std(&x).unwrap() + 1e-6);
        }
    }

    #[test]
    fn sampled_functions_stay_in_the_ball(kernel in kernel_strategy(), seed in any::<u64>(), r in 0.1f64..3.0) {
        let dom = BoxDomain::unit(2).unwrap();
        for mode in [SampleMode::Reject, SampleMode::Rescale] {
            match sample_rkhs(kernel, &dom, 4, r, seed, mode) {
                Ok(s) => prop_assert!(s.function.norm() <= r * (1.0 + 1e-6)),
                Err(ego_bounds::Error::RejectionBudgetExhausted { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn single_knot_acceptance_rate() {
    // One knot, SE kernel: the value is N(0,1) and the norm is |value|, so
    // rejection at R = 1 accepts with probability P(|Z| <= 1).
    let dom = BoxDomain::unit(1).unwrap();
    let k = KernelSpec::se(0.5).unwrap();
    let n = 100_000;
    let mut attempts = 0usize;
    for seed in 0..n {
        attempts += sample_rkhs(k, &dom, 1, 1.0, seed, SampleMode::Reject)
            .unwrap()
            .attempts;
    }
    let rate = n as f64 / attempts as f64;
    assert!((rate - 0.6827).abs() < 0.02, "acceptance rate {rate}");
}
