use serde::Serialize;

use super::timescales::{probe_timescales, TimescaleReport};
use crate::basis::{build_basis, build_diagonals, pair_rates, HamiltonianSpec, LindbladSpec};
use crate::dynamics::{
    dephasing_derivative, evolve_dephasing, make_probe, Couplings, Param, ProbeSpec,
};
use crate::error::{arg, Result};
use crate::qfi::{qcrb, spectral_qfi};

/// Default proportionality between the product-state interrogation time
/// and `n τ_D`.
pub const DEFAULT_INTERROGATION_CONSTANT: f64 = 0.02;

/// Cramér–Rao bound of a dense product-state run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductPoint {
    pub n: usize,
    pub timescales: TimescaleReport,
    /// Interrogation time `c · n · τ_D`.
    pub t: f64,
    pub qfi: f64,
    pub qcrb: f64,
}

/// Evolves `⊗(cos φ|+⟩ + sin φ|−⟩)` under uncorrelated p-body dephasing for
/// `c · n · τ_D` and returns the x1 bound for `T / t` repetitions.
pub fn product_state_point(
    n: usize,
    hamiltonian: &HamiltonianSpec,
    p: usize,
    phi: f64,
    couplings: &Couplings,
    interrogation_constant: f64,
    total_time: f64,
) -> Result<ProductPoint> {
    if !(interrogation_constant > 0.0) || !(total_time > 0.0) {
        return arg(format!(
            "interrogation constant and total time must be positive, got {interrogation_constant}, {total_time}"
        ));
    }
    let basis = build_basis(n)?;
    let diag = build_diagonals(hamiltonian, &LindbladSpec::UncorrelatedPBody { p }, &basis)?;
    let rates = pair_rates(&diag);
    let rho0 = make_probe(&ProbeSpec::Product { phi }, &basis, &diag)?;
    let timescales = probe_timescales(&rho0, &diag, couplings)?;
    if !timescales.tau_d.is_finite() {
        return arg("product-state interrogation time needs x2 > 0");
    }
    let t = interrogation_constant * n as f64 * timescales.tau_d;
    let rho = evolve_dephasing(&rho0, &rates, couplings, t)?;
    let d = dephasing_derivative(&rho, &rates, couplings, t, Param::X1)?;
    let qfi = spectral_qfi(&rho, &d)?;
    Ok(ProductPoint {
        n,
        timescales,
        t,
        qfi,
        qcrb: qcrb(qfi, total_time / t),
    })
}
