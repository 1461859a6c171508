use nlmetro_cli::config::{OutputPaths, TimeGrid, TimeUnit, TwoLevelConfig};
use nlmetro_cli::ScenarioConfig;
use nlmetro_core::verify::Fault;
use nlmetro_core::{HamiltonianSpec, LindbladSpec, ProbeSpec};
use proptest::prelude::*;

fn hamiltonian() -> impl Strategy<Value = HamiltonianSpec> {
    prop_oneof![
        (1usize..6, -3.0..0.0f64, 0.0..3.0f64).prop_map(|(k, eps_m, eps_big_m)| {
            HamiltonianSpec::SymmetrizedUniform {
                k,
                eps_m,
                eps_big_m,
            }
        }),
        (0.0..3.0f64).prop_map(|alpha| HamiltonianSpec::LongRangeIsing { alpha }),
        (1usize..6).prop_map(|k| HamiltonianSpec::SpinChainUniform { k }),
        prop::collection::vec(-10.0..10.0f64, 8)
            .prop_map(|values| HamiltonianSpec::CustomDiagonal { values }),
    ]
}

fn lindblad() -> impl Strategy<Value = LindbladSpec> {
    prop_oneof![
        (1usize..4).prop_map(|p| LindbladSpec::UncorrelatedPBody { p }),
        (1usize..4).prop_map(|k| LindbladSpec::CollectiveSymmetrizedKBody { k }),
    ]
}

fn probe() -> impl Strategy<Value = ProbeSpec> {
    prop_oneof![
        Just(ProbeSpec::MaxVariance),
        Just(ProbeSpec::Ghz),
        Just(ProbeSpec::IsingMaxVariance),
        (0.01..1.5f64).prop_map(|phi| ProbeSpec::Product { phi }),
    ]
}

fn times() -> impl Strategy<Value = TimeGrid> {
    prop_oneof![
        prop::collection::vec(0.0..10.0f64, 1..6).prop_map(TimeGrid::Values),
        (0.0..1.0f64, 1.0..5.0f64, 1usize..50, 0usize..3).prop_map(|(start, stop, count, u)| {
            TimeGrid::Linspace {
                start,
                stop,
                count,
                unit: [TimeUnit::Absolute, TimeUnit::TauD, TimeUnit::TauZ][u],
            }
        }),
    ]
}

prop_compose! {
    fn config()(
        n_sites in prop::option::of(1usize..12),
        n_range in prop::option::of(prop::collection::vec(1usize..500, 5..9)),
        hamiltonian in prop::option::of(hamiltonian()),
        lindblad in prop::option::of(lindblad()),
        probe in prop::option::of(probe()),
        two_level in prop::option::of((0.0..5.0f64, 0.0..5.0f64)),
        x in (prop::option::of(-2.0..2.0f64), prop::option::of(0.0..2.0f64), prop::option::of(0.5..2.0f64)),
        tr in (prop::option::of(1.0..1e4f64), prop::option::of(1.0..1e6f64)),
        times in prop::option::of(times()),
        csv in prop::option::of("[a-z]{1,8}\\.csv"),
        fit_window in prop::option::of((1.0..50.0f64, 60.0..500.0f64)),
        spectrum in prop::option::of(any::<bool>()),
        fault in prop::option::of(0.5..4.0f64),
    ) -> ScenarioConfig {
        ScenarioConfig {
            n_sites,
            n_range,
            hamiltonian,
            lindblad,
            probe,
            two_level: two_level.map(|(eps, lambda_sq)| TwoLevelConfig { eps, lambda_sq }),
            x1: x.0,
            x2: x.1,
            hbar: x.2,
            total_time: tr.0,
            repetitions: tr.1,
            times,
            output: csv.map(|c| OutputPaths { csv: Some(c.into()), json: None }),
            fit_window: fit_window.map(|(a, b)| [a, b]),
            spectrum,
            fault: fault.map(|eps_scale| Fault { eps_scale }),
            ..Default::default()
        }
    }
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(cfg in config()) {
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        let again = serde_json::to_string_pretty(&back).unwrap();
        prop_assert_eq!(again, text);
    }
}
