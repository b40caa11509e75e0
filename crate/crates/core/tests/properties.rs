use lfl_core::analytic::{
    moment_bounds, theorem10_bound, theorem1_bound, theorem5_bound, theorem6_bound, GaussianChain, GaussianLaw,
    MomentInputs, StepChoice, Theorem5Inputs,
};
use lfl_core::samplers::run_chain;
use lfl_core::{InitSpec, PotentialSpec, RngStream, RunConfig, SamplerSpec, StepSchedule};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lmc_gaussian_chain_stays_below_its_bound(
        lambda in 0.2f64..5.0,
        frac in 0.01f64..0.99,
        n in 1u64..400,
        mean in -5.0f64..5.0,
        var in 0.05f64..10.0,
        d in 1usize..6,
    ) {
        let h = frac / (6.0 * lambda);
        let init = GaussianLaw::new(mean, var, d).unwrap();
        let fi = GaussianChain::lmc(lambda).trajectory(h, n, init, 32).time_averaged_fi;
        let b = theorem1_bound(init.kl(lambda), lambda, d as f64, n as f64, StepChoice::Fixed(h));
        prop_assert!(b.admissible);
        prop_assert!(fi < b.value, "{} >= {}", fi, b.value);
    }

    #[test]
    fn biased_chain_stays_below_its_bound(
        beta in 0.0f64..1.0,
        v in 0.0f64..2.0,
        frac in 0.01f64..0.99,
        n in 1u64..300,
        var in 0.1f64..5.0,
    ) {
        let h = frac / 14.0;
        let init = GaussianLaw::new(1.0, var, 1).unwrap();
        let fi = GaussianChain::biased(1.0, beta, v).trajectory(h, n, init, 32).time_averaged_fi;
        let b = theorem6_bound(init.kl(1.0), 1.0, 1.0, n as f64, beta * beta, v, StepChoice::Fixed(h));
        prop_assert!(fi <= b.value);
    }

    #[test]
    fn gradient_moment_is_controlled_by_fi(
        lambda in 0.01f64..100.0,
        mean in -50.0f64..50.0,
        var in 1e-3f64..1e3,
        d in 1usize..50,
    ) {
        let law = GaussianLaw::new(mean, var, d).unwrap();
        let df = d as f64;
        let lhs = lambda * lambda * (mean * mean + df * var);
        prop_assert!(lhs <= law.fi(lambda) + 2.0 * df * lambda);
    }

    #[test]
    fn theorem1_bound_monotonicity(
        k0 in 0.01f64..10.0,
        l in 0.1f64..10.0,
        d in 1.0f64..100.0,
        n in 10.0f64..1e6,
        frac in 0.01f64..0.99,
    ) {
        let h = frac / (6.0 * l);
        let base = theorem1_bound(k0, l, d, n, StepChoice::Fixed(h)).value;
        prop_assert!(theorem1_bound(k0, l, d, 2.0 * n, StepChoice::Fixed(h)).value < base);
        prop_assert!(theorem1_bound(2.0 * k0, l, d, n, StepChoice::Fixed(h)).value > base);
        prop_assert!(theorem1_bound(k0, l, d, n, StepChoice::Optimal).value <= base * (1.0 + 1e-12));
    }

    #[test]
    fn theorem10_grows_as_refresh_probability_falls(
        kl0 in 0.1f64..10.0,
        n in 100.0f64..1e5,
        p in 0.01f64..1.0,
    ) {
        let hi = theorem10_bound(kl0, 0.0, 1.0, 1.0, n, p, StepChoice::Optimal).value;
        let lo = theorem10_bound(kl0, 0.0, 1.0, 1.0, n, (p * 2.0).min(1.0), StepChoice::Optimal).value;
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn smooth_hessian_bound_grows_with_dimension(
        d in 1.0f64..100.0,
        b in 0.1f64..10.0,
        sigma in 3.0f64..10.0,
        frac in 0.0f64..=1.0,
        n in 1e2f64..1e8,
    ) {
        // Monotone in d exactly when K0 <= 2 (b + sigma d).
        let k0 = frac * 2.0 * (b + sigma * d);
        let p = Theorem5Inputs { k0, l: 1.0, m_hess: 1.0, m_growth: 1.0, a: 1.0, b, sigma, d, n };
        let now = theorem5_bound(&p, StepChoice::Optimal);
        let more = theorem5_bound(&Theorem5Inputs { d: d + 1.0, ..p }, StepChoice::Optimal);
        prop_assert!(now.scaling_only);
        prop_assert!(more.value >= now.value * (1.0 - 1e-12));
    }

    #[test]
    fn moment_bounds_grow_with_time(k in 0u64..1000, h in 0.001f64..0.125) {
        let p = MomentInputs { a: 1.0, b: 1.0, gamma: 1.0, m_growth: 1.0, d: 2.0, e_x0_sq: 0.5, e_x0_4: 1.0, k, h };
        let now = moment_bounds(&p);
        let later = moment_bounds(&MomentInputs { k: k + 1, ..p });
        prop_assert!(now.admissible);
        prop_assert!(later.second > now.second && later.fourth > now.fourth);
    }

    #[test]
    fn decaying_schedule_is_positive_nonincreasing_and_accumulates(
        h0 in 1e-4f64..1.0,
        alpha in 0.5001f64..=1.0,
        k in 1u64..10_000,
    ) {
        let s = StepSchedule::power_decay(h0, alpha).unwrap();
        prop_assert!(s.step(k) > 0.0 && s.step(k + 1) <= s.step(k));
        prop_assert!(s.elapsed(k + 1) > s.elapsed(k));
        let tol = 16.0 * f64::EPSILON * s.elapsed(k + 1);
        prop_assert!((s.elapsed(k + 1) - s.elapsed(k) - s.step(k + 1)).abs() <= tol);
    }

    #[test]
    fn streams_are_pure_functions_of_their_address(seed: u64, chain in 0u64..1 << 40, counter in 0u64..1 << 40) {
        let a = RngStream::at(seed, chain, counter).gaussian_draw(3);
        let b = RngStream::at(seed, chain, counter).gaussian_draw(3);
        prop_assert_eq!(a, b);
    }
}

fn base_config(seed: u64, sampler: SamplerSpec, potential: PotentialSpec) -> RunConfig {
    RunConfig {
        potential,
        sampler,
        schedule: StepSchedule::constant(0.02).unwrap(),
        n_steps: 25,
        dim: 1,
        n_chains: 4,
        master_seed: seed,
        init: InitSpec::Gaussian { mean: 1.0, var: 2.0 },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn degenerate_variants_replay_lmc_bit_for_bit(seed: u64, chain in 0u64..1000) {
        let steps: Vec<u64> = (0..=25).collect();
        let quad = PotentialSpec::Quadratic { lambda: 1.0 };
        let lmc = base_config(seed, SamplerSpec::Lmc, quad.clone()).build().unwrap();
        let reference = run_chain(&lmc, chain, &steps).unwrap();
        for sampler in [
            SamplerSpec::SgLmc { bias: 0.0, noise_var: 0.0 },
            SamplerSpec::GsLmc { eta: 0.0, batch: 3 },
        ] {
            let exp = base_config(seed, sampler, quad.clone()).build().unwrap();
            let run = run_chain(&exp, chain, &steps).unwrap();
            for (a, b) in reference.iter().zip(&run) {
                prop_assert_eq!(&a.x, &b.x);
            }
        }

        let fs = PotentialSpec::FiniteSumQuadratic { centers: vec![-1.0, 0.0, 2.0], curvatures: None };
        let lmc = base_config(seed, SamplerSpec::Lmc, fs.clone()).build().unwrap();
        let vr = base_config(seed, SamplerSpec::VrLmc { p: 1.0 }, fs).build().unwrap();
        let a = run_chain(&lmc, chain, &steps).unwrap();
        let b = run_chain(&vr, chain, &steps).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert_eq!(&u.x, &v.x);
        }
    }
}
