//! Turns config specs into states and timescales, preferring closed forms
//! whenever the combination has one.

use serde::Serialize;

use nlmetro_core::basis::{
    build_basis, build_diagonals, pair_rates, DiagonalOperatorSet, PairRates,
};
use nlmetro_core::dynamics::{make_probe, probe_ket};
use nlmetro_core::scaling::{ghz_timescales, ising_max_variance_timescales, population_timescales};
use nlmetro_core::{
    Couplings, DensityMatrix, Error, HamiltonianSpec, LindbladSpec, ProbeSpec, Result,
    TimescaleReport, C64,
};

/// How a timescale row was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GhzClosedForm,
    IsingClosedForm,
    Dense,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GhzClosedForm => "ghz_closed_form",
            Self::IsingClosedForm => "ising_closed_form",
            Self::Dense => "dense",
        }
    }
}

/// A register with its initial state.
pub struct Setup {
    pub diag: DiagonalOperatorSet,
    pub rates: PairRates,
    pub rho0: DensityMatrix,
}

impl Setup {
    pub fn dense(
        n: usize,
        h: &HamiltonianSpec,
        l: &LindbladSpec,
        probe: &ProbeSpec,
    ) -> Result<Self> {
        let basis = build_basis(n)?;
        let diag = build_diagonals(h, l, &basis)?;
        let rho0 = make_probe(probe, &basis, &diag)?;
        Ok(Self {
            rates: pair_rates(&diag),
            diag,
            rho0,
        })
    }

    /// Two energy levels `0` and `eps`, one Lindblad operator whose values
    /// differ by `√lambda_sq`, and the equal superposition.
    pub fn two_level(eps: f64, lambda_sq: f64) -> Result<Self> {
        let diag = DiagonalOperatorSet {
            n_sites: 1,
            hamiltonian_diag: vec![0.0, eps],
            lindblad_diags: vec![vec![0.0, lambda_sq.sqrt()]],
            collective: false,
        };
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok(Self {
            rates: pair_rates(&diag),
            diag,
            rho0: DensityMatrix::pure(&[h, h])?,
        })
    }

    pub fn timescales(&self, c: &Couplings) -> Result<TimescaleReport> {
        let pops: Vec<f64> = (0..self.rho0.dim()).map(|i| self.rho0[(i, i)].re).collect();
        population_timescales(&pops, &self.diag, c)
    }
}

/// Timescales of one register size.
pub fn timescales(
    n: usize,
    h: &HamiltonianSpec,
    l: &LindbladSpec,
    probe: &ProbeSpec,
    c: &Couplings,
) -> Result<(TimescaleReport, Method)> {
    h.validate(n)?;
    l.validate(n)?;
    probe.validate()?;
    match (probe, h) {
        (ProbeSpec::Ghz, HamiltonianSpec::SpinChainUniform { k }) => ghz(n, *k, 1.0, -1.0, l, c),
        (
            ProbeSpec::Ghz,
            HamiltonianSpec::SymmetrizedUniform {
                k,
                eps_m,
                eps_big_m,
            },
        ) => ghz(n, *k, *eps_big_m, *eps_m, l, c),
        (ProbeSpec::IsingMaxVariance, HamiltonianSpec::LongRangeIsing { alpha }) => match *l {
            LindbladSpec::UncorrelatedPBody { p } => Ok((
                ising_max_variance_timescales(n, *alpha, p, c)?,
                Method::IsingClosedForm,
            )),
            LindbladSpec::CollectiveSymmetrizedKBody { .. } => dense(n, h, l, probe, c),
        },
        _ => dense(n, h, l, probe, c),
    }
}

/// The GHZ branches are the all-plus and all-minus states, so every
/// symmetrized k-body operator takes one value per branch.
fn ghz(
    n: usize,
    k: usize,
    up: f64,
    down: f64,
    l: &LindbladSpec,
    c: &Couplings,
) -> Result<(TimescaleReport, Method)> {
    let eps = (up.powi(k as i32) - down.powi(k as i32)).abs();
    if eps == 0.0 {
        return Err(Error::DegenerateProbe(format!(
            "both GHZ branches have the same energy for this {k}-body Hamiltonian"
        )));
    }
    let odd = |j: usize| j % 2 == 1;
    let report = match *l {
        LindbladSpec::UncorrelatedPBody { p } => {
            let lambda_sq = if odd(p) { 4.0 } else { 0.0 };
            ghz_timescales(n, k, p, c, eps, lambda_sq)?
        }
        LindbladSpec::CollectiveSymmetrizedKBody { k: kl } => {
            // The collective operator is ±C(n,kl) on the branches, so its
            // variance is C(n,kl)² for odd kl and zero otherwise.
            let cl = nlmetro_core::binomial::binom(n as u64, kl as u64);
            let spread = eps * nlmetro_core::binomial::binom(n as u64, k as u64);
            let var_l = if odd(kl) { cl * cl } else { 0.0 };
            TimescaleReport::from_variances(spread * spread / 4.0, var_l, c)?
        }
    };
    Ok((report, Method::GhzClosedForm))
}

fn dense(
    n: usize,
    h: &HamiltonianSpec,
    l: &LindbladSpec,
    probe: &ProbeSpec,
    c: &Couplings,
) -> Result<(TimescaleReport, Method)> {
    // Populations only: the density matrix would be 4^n entries.
    let basis = build_basis(n)?;
    let diag = build_diagonals(h, l, &basis)?;
    let pops: Vec<f64> = probe_ket(probe, &basis, &diag)?
        .iter()
        .map(|a| a.norm_sqr())
        .collect();
    Ok((population_timescales(&pops, &diag, c)?, Method::Dense))
}
