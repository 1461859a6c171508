//! Fixtures shared by the criterion benchmarks.

use nlmetro_core::basis::{build_basis, build_diagonals, HamiltonianSpec, LindbladSpec};
use nlmetro_core::dynamics::{make_probe, ProbeSpec};
use nlmetro_core::{pair_rates, DensityMatrix, DiagonalOperatorSet, PairRates};

/// Spin chain with a 2-body Hamiltonian and 1-body dephasing, and a
/// product probe at φ = π/8.
pub fn product_fixture(n: usize) -> (DiagonalOperatorSet, PairRates, DensityMatrix) {
    let basis = build_basis(n).expect("basis");
    let diag = build_diagonals(
        &HamiltonianSpec::SpinChainUniform { k: 2 },
        &LindbladSpec::UncorrelatedPBody { p: 1 },
        &basis,
    )
    .expect("diagonals");
    let rates = pair_rates(&diag);
    let rho = make_probe(
        &ProbeSpec::Product {
            phi: std::f64::consts::FRAC_PI_8,
        },
        &basis,
        &diag,
    )
    .expect("probe");
    (diag, rates, rho)
}
