//! Spectral quantum Fisher information, its variance-based bounds, the
//! closed forms for the two-level probe, and the Cramér–Rao bound.

use serde::Serialize;

use crate::basis::DiagonalOperatorSet;
use crate::dynamics::{Param, TwoLevelProbe};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64};
use crate::oracle::{hermitian_eigendecomposition, Eigen};

/// Pairs with `ξ_n + ξ_n' ` below this are left out of the spectral sums.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

/// Eigenvalues at or below this count as zero when forming `c_m`, `c_M`.
const ZERO_EIGENVALUE: f64 = 1e-12;

/// Relative gap under which adjacent eigenvalues count as degenerate.
const DEGENERATE: f64 = 1e-9;

/// Which lower bound was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundKind {
    /// Pure state: the bound is the variance itself.
    Pure,
    /// `c_m · 4t²(ΔH² − Σ_n ξ_n |H̃_nn|²)/ħ²` for a nondegenerate spectrum.
    Standard,
    /// Degenerate spectrum: the top-eigenspace bound with the gap below the
    /// largest eigenvalue.
    Improved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiBounds {
    pub lower: f64,
    pub upper: f64,
    pub c_m: f64,
    #[serde(rename = "c_M")]
    pub c_big_m: f64,
    pub variance_h: f64,
    pub kind: LowerBoundKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiReport {
    pub qfi: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub c_m: f64,
    #[serde(rename = "c_M")]
    pub c_big_m: f64,
    pub variance_h: f64,
    pub qcrb: f64,
    pub bound_kind: LowerBoundKind,
}

/// Rows and columns on which both ρ and ∂ρ vanish carry no information and
/// are dropped before diagonalizing.
fn support(rho: &CMatrix, drhos: &[&CMatrix]) -> Vec<usize> {
    let n = rho.dim();
    (0..n)
        .filter(|&i| {
            rho.row(i).iter().any(|z| z.norm_sqr() > 0.0)
                || drhos
                    .iter()
                    .any(|d| d.row(i).iter().any(|z| z.norm_sqr() > 0.0))
        })
        .collect()
}

fn check_derivative(rho: &DensityMatrix, drho: &CMatrix) -> Result<()> {
    if drho.dim() != rho.dim() {
        return Err(Error::Dimension(drho.dim(), rho.dim()));
    }
    let scale = drho.max_abs().max(1.0);
    let defect = drho.hermiticity_defect();
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let tr = drho.trace().norm();
    if tr > 1e-10 * scale {
        return Err(Error::Argument(format!(
            "derivative must be traceless, trace is {tr:e}"
        )));
    }
    Ok(())
}

/// Eigendecomposition of ρ restricted to the support of (ρ, ∂ρ…), and each
/// derivative rotated into that eigenbasis.
struct Frame {
    idx: Vec<usize>,
    sub: CMatrix,
    eig: Eigen,
    rotated: Vec<CMatrix>,
}

fn spectral_frame(rho: &DensityMatrix, drhos: &[&CMatrix]) -> Result<Frame> {
    let idx = support(rho.matrix(), drhos);
    let sub = rho.matrix().submatrix(&idx);
    let eig = hermitian_eigendecomposition(&sub)?;
    let v = &eig.vectors;
    let vh = v.adjoint();
    let rotated = drhos
        .iter()
        .map(|d| vh.matmul(&d.submatrix(&idx)).matmul(v))
        .collect();
    Ok(Frame {
        idx,
        sub,
        eig,
        rotated,
    })
}

fn qfi_in_frame(xi: &[f64], d: &CMatrix, cutoff: f64) -> f64 {
    let mut f = 0.0;
    for n in 0..xi.len() {
        for m in 0..xi.len() {
            let s = xi[n] + xi[m];
            if s > cutoff {
                f += 4.0 * xi[n].max(0.0) * d[(n, m)].norm_sqr() / (s * s);
            }
        }
    }
    f
}

/// `Σ 4 ξ_n |⟨n|∂ρ|n'⟩|² / (ξ_n + ξ_n')²` over pairs above the cutoff.
pub fn spectral_qfi(rho: &DensityMatrix, drho: &CMatrix) -> Result<f64> {
    spectral_qfi_with_cutoff(rho, drho, DEFAULT_CUTOFF)
}

pub fn spectral_qfi_with_cutoff(rho: &DensityMatrix, drho: &CMatrix, cutoff: f64) -> Result<f64> {
    check_derivative(rho, drho)?;
    let frame = spectral_frame(rho, &[drho])?;
    Ok(qfi_in_frame(&frame.eig.values, &frame.rotated[0], cutoff))
}

/// `Σ 2 Re[⟨k|∂1ρ|l⟩⟨l|∂2ρ|k⟩] / (ξ_k + ξ_l)`.
pub fn qfi_offdiagonal(rho: &DensityMatrix, drho1: &CMatrix, drho2: &CMatrix) -> Result<f64> {
    check_derivative(rho, drho1)?;
    check_derivative(rho, drho2)?;
    let frame = spectral_frame(rho, &[drho1, drho2])?;
    Ok(offdiagonal_in_frame(
        &frame.eig.values,
        &frame.rotated[0],
        &frame.rotated[1],
    ))
}

fn offdiagonal_in_frame(xi: &[f64], d1: &CMatrix, d2: &CMatrix) -> f64 {
    let mut f = 0.0;
    for k in 0..xi.len() {
        for l in 0..xi.len() {
            let s = xi[k] + xi[l];
            if s > DEFAULT_CUTOFF {
                f += 2.0 * (d1[(k, l)] * d2[(l, k)]).re / s;
            }
        }
    }
    f
}

/// Variance-based bounds on the QFI of `x1` for a diagonal Hamiltonian.
pub fn qfi_bounds(
    rho: &DensityMatrix,
    diag: &DiagonalOperatorSet,
    t: f64,
    hbar: f64,
) -> Result<QfiBounds> {
    check_hamiltonian(rho, diag)?;
    let frame = spectral_frame(rho, &[])?;
    Ok(bounds_in_frame(
        rho.dim(),
        &frame,
        &diag.hamiltonian_diag,
        t,
        hbar,
    ))
}

fn check_hamiltonian(rho: &DensityMatrix, diag: &DiagonalOperatorSet) -> Result<()> {
    let h = &diag.hamiltonian_diag;
    if h.len() != rho.dim() {
        return Err(Error::Dimension(h.len(), rho.dim()));
    }
    Ok(())
}

fn bounds_in_frame(full_dim: usize, frame: &Frame, h: &[f64], t: f64, hbar: f64) -> QfiBounds {
    let Frame { idx, sub, eig, .. } = frame;
    let hs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
    let xi = &eig.values;
    let d = xi.len();

    let mean: f64 = (0..d).map(|i| sub[(i, i)].re * hs[i]).sum();
    let centered: Vec<f64> = hs.iter().map(|e| e - mean).collect();
    let variance_h: f64 = (0..d)
        .map(|i| sub[(i, i)].re * centered[i] * centered[i])
        .sum::<f64>()
        .max(0.0);
    let pref = 4.0 * t * t / (hbar * hbar);

    // If ρ was reduced to its support the dropped eigenvalues are exact zeros.
    let has_zero = idx.len() < full_dim || xi.first().map_or(true, |&x| x <= ZERO_EIGENVALUE);
    let x_max = xi.last().copied().unwrap_or(0.0);
    let x_min = if has_zero { 0.0 } else { xi[0] };
    let c_big_m = ((x_max - x_min) / (x_max + x_min)).powi(2);

    let positive: Vec<f64> = xi
        .iter()
        .copied()
        .filter(|&x| x > ZERO_EIGENVALUE)
        .collect();
    if positive.len() < 2 {
        return QfiBounds {
            lower: pref * variance_h,
            upper: c_big_m * pref * variance_h,
            c_m: 1.0,
            c_big_m,
            variance_h,
            kind: LowerBoundKind::Pure,
        };
    }
    let r = positive.windows(2).map(|w| w[0] / w[1]).fold(0.0, f64::max);

    // H̃ = H − ⟨H⟩ in the eigenbasis of ρ.
    let v = &eig.vectors;
    let h_col = |n: usize| -> Vec<C64> { (0..d).map(|i| v[(i, n)] * centered[i]).collect() };

    if r < 1.0 - DEGENERATE {
        let c_m = ((1.0 - r) / (1.0 + r)).powi(2);
        let diag_part: f64 = (0..d)
            .map(|n| {
                let hn = h_col(n);
                let hnn: f64 = (0..d).map(|i| (v[(i, n)].conj() * hn[i]).re).sum();
                xi[n].max(0.0) * hnn * hnn
            })
            .sum();
        return QfiBounds {
            lower: c_m * pref * (variance_h - diag_part).max(0.0),
            upper: c_big_m * pref * variance_h,
            c_m,
            c_big_m,
            variance_h,
            kind: LowerBoundKind::Standard,
        };
    }

    // Degenerate spectrum: only the top eigenspace is used.
    let top: Vec<usize> = (0..d)
        .filter(|&n| xi[n] > x_max * (1.0 - DEGENERATE))
        .collect();
    let below = (0..d)
        .filter(|&n| xi[n] <= x_max * (1.0 - DEGENERATE))
        .map(|n| xi[n])
        .fold(0.0, f64::max);
    let c_m = ((x_max - below) / (x_max + below)).powi(2);
    let mut leak = 0.0;
    for &n in &top {
        let hn = h_col(n);
        let total: f64 = hn.iter().map(|z| z.norm_sqr()).sum();
        let inside: f64 = top
            .iter()
            .map(|&m| {
                (0..d)
                    .map(|i| v[(i, m)].conj() * hn[i])
                    .sum::<C64>()
                    .norm_sqr()
            })
            .sum();
        leak += (total - inside).max(0.0);
    }
    QfiBounds {
        lower: c_m * pref * x_max * leak,
        upper: c_big_m * pref * variance_h,
        c_m,
        c_big_m,
        variance_h,
        kind: LowerBoundKind::Improved,
    }
}

/// Closed-form QFI of the two-level probe.
pub fn analytic_qfi(probe: &TwoLevelProbe, which: Param, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match which {
        Param::X1 => {
            let tz = probe.tau_z();
            let decay = (-4.0 * t / probe.tau_d()).exp();
            t * t / (probe.x1 * probe.x1 * tz * tz) * decay
        }
        Param::X2 => {
            // β² e^{−2βx2}/(1 − e^{−2βx2}) with β = λ²t/2 = 2t/(x2 τ_D),
            // i.e. 4t²/(x2²τ_D²) · e^{−4t/τ_D}/(1 − e^{−4t/τ_D}).
            let beta = probe.lambda_sq * t / 2.0;
            if beta == 0.0 {
                return 0.0;
            }
            let a = probe.x2 * beta;
            if a == 0.0 {
                return f64::INFINITY;
            }
            beta * beta / (2.0 * a).exp_m1()
        }
    }
}

/// `1/√(ν F)`; infinite when the QFI vanishes.
pub fn qcrb(qfi: f64, repetitions: f64) -> f64 {
    if qfi <= 0.0 || repetitions <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (repetitions * qfi).sqrt()
    }
}

/// Full report for the `x1` QFI of an evolved state.
pub fn qfi_report(
    rho_t: &DensityMatrix,
    drho_x1: &CMatrix,
    diag: &DiagonalOperatorSet,
    t: f64,
    hbar: f64,
    repetitions: f64,
) -> Result<QfiReport> {
    check_derivative(rho_t, drho_x1)?;
    check_hamiltonian(rho_t, diag)?;
    // One eigendecomposition on the joint support serves both; rows outside
    // ρ's own support only add exact zero eigenvalues.
    let frame = spectral_frame(rho_t, &[drho_x1])?;
    Ok(report_in_frame(
        rho_t.dim(),
        &frame,
        diag,
        t,
        hbar,
        repetitions,
    ))
}

/// Both diagonal QFI entries and the joint term of the two-parameter problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairReport {
    pub x1: QfiReport,
    pub qfi_x2: f64,
    pub f12: f64,
}

/// [`qfi_report`] plus `F_x2` and `F_12`, from a single eigendecomposition.
pub fn qfi_pair_report(
    rho_t: &DensityMatrix,
    drho_x1: &CMatrix,
    drho_x2: &CMatrix,
    diag: &DiagonalOperatorSet,
    t: f64,
    hbar: f64,
    repetitions: f64,
) -> Result<PairReport> {
    check_derivative(rho_t, drho_x1)?;
    check_derivative(rho_t, drho_x2)?;
    check_hamiltonian(rho_t, diag)?;
    let frame = spectral_frame(rho_t, &[drho_x1, drho_x2])?;
    let xi = &frame.eig.values;
    Ok(PairReport {
        x1: report_in_frame(rho_t.dim(), &frame, diag, t, hbar, repetitions),
        qfi_x2: qfi_in_frame(xi, &frame.rotated[1], DEFAULT_CUTOFF),
        f12: offdiagonal_in_frame(xi, &frame.rotated[0], &frame.rotated[1]),
    })
}

/// [`qfi_report`] together with the joint term `F_12`.
pub fn qfi_report_with_joint(
    rho_t: &DensityMatrix,
    drho_x1: &CMatrix,
    drho_x2: &CMatrix,
    diag: &DiagonalOperatorSet,
    t: f64,
    hbar: f64,
    repetitions: f64,
) -> Result<(QfiReport, f64)> {
    let r = qfi_pair_report(rho_t, drho_x1, drho_x2, diag, t, hbar, repetitions)?;
    Ok((r.x1, r.f12))
}

fn report_in_frame(
    full_dim: usize,
    frame: &Frame,
    diag: &DiagonalOperatorSet,
    t: f64,
    hbar: f64,
    repetitions: f64,
) -> QfiReport {
    let qfi = qfi_in_frame(&frame.eig.values, &frame.rotated[0], DEFAULT_CUTOFF);
    let b = bounds_in_frame(full_dim, frame, &diag.hamiltonian_diag, t, hbar);
    QfiReport {
        qfi,
        lower_bound: b.lower,
        upper_bound: b.upper,
        c_m: b.c_m,
        c_big_m: b.c_big_m,
        variance_h: b.variance_h,
        qcrb: qcrb(qfi, repetitions),
        bound_kind: b.kind,
    }
}
