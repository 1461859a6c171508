use serde::Serialize;

use crate::basis::DiagonalOperatorSet;
use crate::binomial::binom;
use crate::dynamics::{Couplings, Param};
use crate::error::{arg, Error, Result};
use crate::linalg::DensityMatrix;

/// Zeno and decoherence times with the variances they come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimescaleReport {
    pub tau_z: f64,
    /// `+∞` for a closed system.
    pub tau_d: f64,
    pub variance_h: f64,
    pub sum_variance_l: f64,
}

impl TimescaleReport {
    /// `τ_Z = ħ/(2 x1 ΔH)`, `τ_D = 1/(x2 Σ_ν ΔL_ν²)`.
    pub fn from_variances(variance_h: f64, sum_variance_l: f64, c: &Couplings) -> Result<Self> {
        c.validate()?;
        if !(variance_h > 0.0) {
            return Err(Error::DegenerateProbe(
                "the probe has zero energy variance, so the Zeno time is undefined".into(),
            ));
        }
        let rate = c.x2 * sum_variance_l;
        Ok(Self {
            tau_z: c.hbar / (2.0 * c.x1.abs() * variance_h.sqrt()),
            tau_d: if rate > 0.0 {
                1.0 / rate
            } else {
                f64::INFINITY
            },
            variance_h,
            sum_variance_l,
        })
    }
}

/// Timescales from the variances of H and every L_ν on a diagonal-basis probe.
pub fn probe_timescales(
    rho0: &DensityMatrix,
    diag: &DiagonalOperatorSet,
    c: &Couplings,
) -> Result<TimescaleReport> {
    if rho0.dim() != diag.dim() {
        return Err(Error::Dimension(rho0.dim(), diag.dim()));
    }
    let pops: Vec<f64> = (0..rho0.dim()).map(|i| rho0[(i, i)].re).collect();
    population_timescales(&pops, diag, c)
}

/// Timescales from the basis-state populations alone; avoids building ρ for
/// large registers.
pub fn population_timescales(
    pops: &[f64],
    diag: &DiagonalOperatorSet,
    c: &Couplings,
) -> Result<TimescaleReport> {
    if pops.len() != diag.dim() {
        return Err(Error::Dimension(pops.len(), diag.dim()));
    }
    let total: f64 = pops.iter().sum();
    let anchor = pops.iter().position(|p| *p > 0.0).unwrap_or(0);
    // Deviations from a populated value vanish exactly when the operator is
    // constant on the support, so roundoff in the populations cannot leave
    // a spurious variance behind.
    let variance = |values: &[f64]| -> (f64, f64) {
        let r = values[anchor];
        let mean: f64 = pops
            .iter()
            .zip(values)
            .map(|(p, v)| p * (v - r))
            .sum::<f64>()
            / total;
        let var: f64 = pops
            .iter()
            .zip(values)
            .map(|(p, v)| p * (v - r - mean).powi(2))
            .sum::<f64>()
            / total;
        let scale = values.iter().map(|v| v * v).fold(0.0, f64::max);
        (var, scale)
    };
    let (variance_h, scale) = variance(&diag.hamiltonian_diag);
    if variance_h <= 1e-12 * scale {
        return Err(Error::DegenerateProbe(
            "the probe's energy spread vanishes (degenerate branch energies); choose another probe"
                .into(),
        ));
    }
    let sum_variance_l = diag.lindblad_diags.iter().map(|l| variance(l).0).sum();
    TimescaleReport::from_variances(variance_h, sum_variance_l, c)
}

/// GHZ timescales for a k-body Hamiltonian with single-term seminorm `eps`
/// and p-body Lindblads with per-operator gap `lambda_sq`.
pub fn ghz_timescales(
    n: usize,
    k: usize,
    p: usize,
    c: &Couplings,
    eps: f64,
    lambda_sq: f64,
) -> Result<TimescaleReport> {
    if k == 0 || k > n || p == 0 || p > n {
        return arg(format!(
            "need 1 <= k, p <= n, got k = {k}, p = {p}, n = {n}"
        ));
    }
    if !(eps > 0.0) || !(lambda_sq >= 0.0) {
        return arg(format!(
            "need eps > 0 and lambda_sq >= 0, got {eps}, {lambda_sq}"
        ));
    }
    let spread = eps * binom(n as u64, k as u64);
    let sum_variance_l = lambda_sq * binom(n as u64, p as u64) / 4.0;
    TimescaleReport::from_variances(spread * spread / 4.0, sum_variance_l, c)
}

/// Optimal interrogation time in units of τ_D.
pub fn optimal_interrogation(which: Param) -> f64 {
    match which {
        Param::X1 => 0.5,
        Param::X2 => mu2(),
    }
}

/// Root of `e^{−4μ} = 1 − 2μ` on (0, 1/2) by bisection.
fn mu2() -> f64 {
    let f = |mu: f64| (-4.0 * mu).exp() - (1.0 - 2.0 * mu);
    // f < 0 just right of the trivial root at 0 and f(1/2) > 0.
    let (mut lo, mut hi) = (0.1, 0.5);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `κ1 = √μ1 e^{−2μ1}`, `κ2 = √μ2 (e^{4μ2} − 1)^{−1/2}`.
pub fn kappa(which: Param) -> f64 {
    let mu = optimal_interrogation(which);
    match which {
        Param::X1 => mu.sqrt() * (-2.0 * mu).exp(),
        Param::X2 => mu.sqrt() / (4.0 * mu).exp_m1().sqrt(),
    }
}

/// Cramér–Rao bound at the optimal interrogation time for total time `T`:
/// `δx1 ≥ (x1/κ1) τ_Z/√(T τ_D)` and `δx2 ≥ (x2/(2κ2)) √(τ_D/T)`.
pub fn sensitivity_bound(
    report: &TimescaleReport,
    total_time: f64,
    which: Param,
    x_value: f64,
) -> Result<f64> {
    if !(total_time > 0.0) {
        return arg(format!("total time must be positive, got {total_time}"));
    }
    if !report.tau_d.is_finite() {
        return Err(Error::Unsupported(
            "no decoherence (x2 = 0): the interrogation time is not set by τ_D".into(),
        ));
    }
    let x = x_value.abs();
    Ok(match which {
        Param::X1 => x / kappa(Param::X1) * report.tau_z / (total_time * report.tau_d).sqrt(),
        Param::X2 => x / (2.0 * kappa(Param::X2)) * (report.tau_d / total_time).sqrt(),
    })
}

/// Decoherence time of a GHZ probe under one collective symmetrized k-body
/// Lindblad operator: `1/(γ C(n,k)²)`.
pub fn collective_noise_tau_d(n: usize, k: usize, gamma: f64) -> Result<f64> {
    if k == 0 || k > n {
        return arg(format!("need 1 <= k <= n, got k = {k}, n = {n}"));
    }
    if k % 2 == 0 {
        return Err(Error::Unsupported(format!(
            "k = {k} is even: the collective operator takes the same value C(n,k) on both GHZ branches, \
             so the GHZ probe does not dephase"
        )));
    }
    if !(gamma > 0.0) {
        return arg(format!("gamma must be positive, got {gamma}"));
    }
    let c = binom(n as u64, k as u64);
    Ok(1.0 / (gamma * c * c))
}
