use lfl_cli::config_file::{parse, to_text, ExperimentConfig};
use lfl_core::{InitSpec, PotentialSpec, RunConfig, SamplerSpec, StepSchedule};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, 1e-12f64..1e-3, Just(0.0), Just(1.0)]
}

fn potential() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        finite().prop_map(|lambda| PotentialSpec::Quadratic { lambda }),
        (prop::collection::vec(finite(), 1..4), prop::collection::vec(finite(), 1..4))
            .prop_map(|(weights, means)| PotentialSpec::GaussianMixture1D { weights, means }),
        Just(PotentialSpec::PseudoHuber),
        finite().prop_map(|s| PotentialSpec::HolderPower { s }),
        (prop::collection::vec(finite(), 1..6), prop::option::of(prop::collection::vec(finite(), 1..6)))
            .prop_map(|(centers, curvatures)| PotentialSpec::FiniteSumQuadratic { centers, curvatures }),
        finite().prop_map(|lipschitz| PotentialSpec::Flat { lipschitz }),
    ]
}

fn sampler() -> impl Strategy<Value = SamplerSpec> {
    prop_oneof![
        Just(SamplerSpec::Lmc),
        (finite(), finite()).prop_map(|(bias, noise_var)| SamplerSpec::SgLmc { bias, noise_var }),
        (finite(), 1usize..1000).prop_map(|(eta, batch)| SamplerSpec::GsLmc { eta, batch }),
        finite().prop_map(|p| SamplerSpec::VrLmc { p }),
    ]
}

fn schedule() -> impl Strategy<Value = StepSchedule> {
    prop_oneof![
        (1e-9f64..10.0).prop_map(|h| StepSchedule::constant(h).unwrap()),
        (1e-9f64..10.0, 0.5001f64..=1.0).prop_map(|(h0, a)| StepSchedule::power_decay(h0, a).unwrap()),
    ]
}

fn init() -> impl Strategy<Value = InitSpec> {
    prop_oneof![
        prop::collection::vec(finite(), 1..5).prop_map(InitSpec::Point),
        (finite(), finite()).prop_map(|(mean, var)| InitSpec::Gaussian { mean, var }),
    ]
}

fn config() -> impl Strategy<Value = ExperimentConfig> {
    (
        potential(),
        sampler(),
        schedule(),
        (0u64..1 << 40, 1usize..100, 1u64..1 << 30, any::<u64>()),
        init(),
        prop::collection::vec(0u64..1 << 40, 1..5),
        prop::option::of("[a-z][a-z0-9_/]{0,12}"),
    )
        .prop_map(|(potential, sampler, schedule, (n_steps, dim, n_chains, master_seed), init, snapshot_steps, output_dir)| {
            ExperimentConfig {
                run: RunConfig { potential, sampler, schedule, n_steps, dim, n_chains, master_seed, init },
                snapshot_steps,
                output_dir,
            }
        })
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(c in config()) {
        let text = to_text(&c);
        let once = parse(&text).unwrap();
        prop_assert_eq!(&once, &c);
        prop_assert_eq!(parse(&to_text(&once)).unwrap(), once);
    }
}
