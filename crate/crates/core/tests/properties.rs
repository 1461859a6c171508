use nlmetro_core::basis::{
    build_basis, build_diagonals, combinations, gap_spectrum_from_reference, kbody_degeneracy,
    min_nonzero_gap, pair_rates, zprod_eigenvalue, HamiltonianSpec, LindbladSpec,
};
use nlmetro_core::binomial::binom;
use nlmetro_core::dynamics::{
    evolve_dephasing, make_probe, purity, two_level_eigenvalues, two_level_state, Couplings,
    ProbeSpec, TwoLevelProbe,
};
use nlmetro_core::qfi::{analytic_qfi, qfi_bounds, spectral_qfi};
use nlmetro_core::scaling::{fit_scaling_exponent, optimal_interrogation};
use nlmetro_core::Param;
use proptest::prelude::*;

fn chain_spec(k: usize) -> HamiltonianSpec {
    HamiltonianSpec::SpinChainUniform { k }
}

fn probe_strategy() -> impl Strategy<Value = ProbeSpec> {
    prop_oneof![
        Just(ProbeSpec::Ghz),
        Just(ProbeSpec::MaxVariance),
        (0.05f64..1.5).prop_map(|phi| ProbeSpec::Product { phi }),
    ]
}

/// Degeneracies from enumerating every k-tuple on |v_q⟩.
fn enumerate_degeneracy(n: usize, k: usize, q: usize) -> (u128, u128) {
    let basis = build_basis(n).unwrap();
    let idx = basis.reference(q).unwrap();
    let mut plus = 0u128;
    let mut minus = 0u128;
    for tuple in combinations(n, k) {
        match zprod_eigenvalue(&basis, idx, &tuple).unwrap() {
            1 => plus += 1,
            _ => minus += 1,
        }
    }
    (plus, minus)
}

#[test]
fn degeneracy_matches_enumeration_up_to_twelve_sites() {
    for n in 1..=12 {
        for k in 1..=n {
            for q in 0..=n {
                let (p, m) = kbody_degeneracy(n, k, q).unwrap();
                assert_eq!((p, m), enumerate_degeneracy(n, k, q), "n={n} k={k} q={q}");
                assert_eq!((p + m) as f64, binom(n as u64, k as u64));
            }
        }
    }
}

#[test]
fn min_gap_matches_enumerated_minimum() {
    for n in 2..=10 {
        for p in 1..(n / 2) {
            let enumerated = gap_spectrum_from_reference(n, p)
                .unwrap()
                .into_iter()
                .map(|g| g.1)
                .filter(|&g| g > 0.0)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(min_nonzero_gap(n, p).unwrap(), enumerated, "n={n} p={p}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pair_rates_are_exactly_antisymmetric_and_symmetric(n in 2usize..7, k in 1usize..4, p in 1usize..4) {
        prop_assume!(k <= n && p <= n);
        let basis = build_basis(n).unwrap();
        let diag = build_diagonals(&chain_spec(k), &LindbladSpec::UncorrelatedPBody { p }, &basis).unwrap();
        let r = pair_rates(&diag);
        for i in 0..basis.dim() {
            prop_assert_eq!(r.eps(i, i), 0.0);
            prop_assert_eq!(r.lambda_sq(i, i), 0.0);
            for j in 0..basis.dim() {
                prop_assert_eq!(r.eps(i, j), -r.eps(j, i));
                prop_assert_eq!(r.lambda_sq(i, j), r.lambda_sq(j, i));
                prop_assert_eq!(r.lambda_sq(i, j).fract(), 0.0);
            }
        }
    }

    #[test]
    fn global_flip_maps_k_body_values_by_parity(n in 1usize..9, k in 1usize..5, seed in 0usize..256) {
        prop_assume!(k <= n);
        let basis = build_basis(n).unwrap();
        let idx = seed % basis.dim();
        let flipped = basis.flip(idx);
        let sign = if k % 2 == 0 { 1 } else { -1 };
        for tuple in combinations(n, k) {
            let a = zprod_eigenvalue(&basis, idx, &tuple).unwrap();
            let b = zprod_eigenvalue(&basis, flipped, &tuple).unwrap();
            prop_assert_eq!(b, sign * a);
        }
    }

    #[test]
    fn evolved_states_stay_physical(
        n in 2usize..6,
        k in 1usize..4,
        p in 1usize..3,
        probe in probe_strategy(),
        x1 in 0.1f64..2.0,
        x2 in 0.0f64..1.0,
        t in 0.0f64..3.0,
    ) {
        prop_assume!(k <= n && p <= n);
        let basis = build_basis(n).unwrap();
        let diag = build_diagonals(&chain_spec(k), &LindbladSpec::UncorrelatedPBody { p }, &basis).unwrap();
        let rho0 = match make_probe(&probe, &basis, &diag) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        let rho = evolve_dephasing(&rho0, &pair_rates(&diag), &Couplings::new(x1, x2), t).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.matrix().hermiticity_defect() < 1e-14);
        prop_assert!(rho.min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn purity_never_increases(n in 2usize..6, p in 1usize..3, x2 in 0.01f64..1.0, phi in 0.05f64..1.5) {
        prop_assume!(p <= n);
        let basis = build_basis(n).unwrap();
        let diag = build_diagonals(&chain_spec(1), &LindbladSpec::UncorrelatedPBody { p }, &basis).unwrap();
        let rates = pair_rates(&diag);
        let rho0 = make_probe(&ProbeSpec::Product { phi }, &basis, &diag).unwrap();
        let c = Couplings::new(1.0, x2);
        let mut last = f64::INFINITY;
        for i in 0..20 {
            let pt = purity(&evolve_dephasing(&rho0, &rates, &c, 0.2 * i as f64).unwrap());
            prop_assert!(pt <= last + 1e-14);
            last = pt;
        }
    }

    #[test]
    fn two_level_purity_closed_form(eps in 0.1f64..5.0, lsq in 0.1f64..8.0, x2 in 0.05f64..2.0, t in 0.0f64..4.0) {
        let probe = TwoLevelProbe::new(eps, lsq, Couplings::new(1.0, x2)).unwrap();
        let rho = two_level_state(&probe, t).unwrap();
        let expected = 0.5 * (1.0 + (-4.0 * t / probe.tau_d()).exp());
        prop_assert!((purity(&rho) - expected).abs() < 1e-14);
        let (a, b) = two_level_eigenvalues(&probe, t);
        prop_assert!((a * a + b * b - expected).abs() < 1e-14);
    }

    #[test]
    fn sandwich_holds_on_random_product_states(
        n in 2usize..6,
        k in 1usize..3,
        p in 1usize..3,
        phi in 0.1f64..1.4,
        x2 in 0.0f64..0.5,
        t in 0.01f64..1.0,
    ) {
        prop_assume!(k <= n && p <= n);
        let basis = build_basis(n).unwrap();
        let diag = build_diagonals(&chain_spec(k), &LindbladSpec::UncorrelatedPBody { p }, &basis).unwrap();
        let rates = pair_rates(&diag);
        let c = Couplings::new(1.0, x2);
        let rho0 = make_probe(&ProbeSpec::Product { phi }, &basis, &diag).unwrap();
        let rho = evolve_dephasing(&rho0, &rates, &c, t).unwrap();
        let d = nlmetro_core::dynamics::dephasing_derivative(&rho, &rates, &c, t, Param::X1).unwrap();
        let f = spectral_qfi(&rho, &d).unwrap();
        let b = qfi_bounds(&rho, &diag, t, 1.0).unwrap();
        let slack = 1e-9 * b.upper.max(1.0);
        prop_assert!(b.lower <= f + slack, "lower {} > qfi {}", b.lower, f);
        prop_assert!(f <= b.upper + slack, "qfi {} > upper {}", f, b.upper);
        prop_assert!((0.0..=1.0).contains(&b.c_m) && (0.0..=1.0).contains(&b.c_big_m));
    }

    #[test]
    fn power_law_slope_is_recovered(exponent in -3.0f64..3.0, scale in 0.1f64..10.0) {
        let s: Vec<(f64, f64)> = (3..20).map(|n| (n as f64, scale * (n as f64).powf(exponent))).collect();
        let (slope, stderr) = fit_scaling_exponent(&s).unwrap();
        prop_assert!((slope - exponent).abs() < 1e-10);
        prop_assert!(stderr < 1e-10);
    }
}

#[test]
fn interrogation_times_maximize_the_closed_forms() {
    let probe = TwoLevelProbe::new(2.0, 4.0, Couplings::new(0.7, 0.3)).unwrap();
    for which in [Param::X1, Param::X2] {
        let mu = optimal_interrogation(which);
        let at = |m: f64| analytic_qfi(&probe, which, m * probe.tau_d());
        assert!(
            at(mu) > at(mu - 0.01) && at(mu) > at(mu + 0.01),
            "{which:?}"
        );
    }
}
