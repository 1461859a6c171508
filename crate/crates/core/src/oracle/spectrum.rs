//! Eigenvalue structure of the dephased uniform product state.
//!
//! Every eigenvalue trajectory is expected to take the form
//! `ξ_n(t) = 2^−N (1 + Σ_α κ_n^α e^{−γ Λ_α² t / 2})` with `Σ_n κ_n^α = 0`,
//! the rates `Λ_α²` drawn from the gap spectrum.

use super::dd::{Dd, Dot2};
use super::eigen::hermitian_eigendecomposition;
use super::lstsq::lstsq_dd;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64};

/// Magnitude below which a fitted κ is treated as absent.
pub const KAPPA_SIGNIFICANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SpectrumCheck {
    /// Distinct `Λ²` values used as decay channels, ascending.
    pub gaps: Vec<f64>,
    /// `kappas[n][α]` for eigenvector `n` and channel `α`.
    pub kappas: Vec<Vec<f64>>,
    /// Worst `|ξ_fit − ξ|` over eigenvalues and times (the trace is 1).
    pub max_residual: f64,
    /// Worst `|Σ_n κ_n^α|` over channels.
    pub max_kappa_sum: f64,
    /// Slowest nonconstant decay rate `γΛ²/2` carrying a significant κ.
    pub slowest_rate: Option<f64>,
    /// Worst `‖ρ(t) v_n − ξ_n v_n‖`: how well the reference eigenbasis
    /// diagonalizes every sampled state.
    pub eigvec_residual: f64,
}

/// Fits the sampled trajectory. `states[i]` is ρ at `times[i]`; `gaps` are
/// the `(q, Λ²)` pairs of the gap spectrum.
pub fn product_state_spectrum_check(
    states: &[DensityMatrix],
    times: &[f64],
    gaps: &[(usize, f64)],
    gamma: f64,
) -> Result<SpectrumCheck> {
    if states.len() != times.len() {
        return Err(Error::Dimension(states.len(), times.len()));
    }
    let mut distinct: Vec<f64> = gaps.iter().map(|g| g.1).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    if times.len() < distinct.len() + 2 {
        return Err(Error::Sampling(format!(
            "{} samples for {} decay channels; need at least {}",
            times.len(),
            distinct.len(),
            distinct.len() + 2
        )));
    }
    let dim = states[0].dim();
    let scale = dim as f64;

    // Reference eigenbasis from a sample away from t = 0, where the state is
    // pure and maximally degenerate.
    let reference = &states[(states.len() / 3).max(1).min(states.len() - 1)];
    let eig = hermitian_eigendecomposition(reference.matrix())?;
    let raw: Vec<Vec<C64>> = (0..dim).map(|n| eig.vector(n)).collect();

    // The model fixes Σ_n ξ_n = 1 and has no constant channel, while the
    // fit amplifies any constant offset by its conditioning (about 1e10 for
    // N = 8, p = 3). So the basis is orthonormalized in double-double, each
    // ξ is divided by the sampled state's own trace, and the eigenvalues,
    // the fit and the κ-sums are all carried in double-double.
    let (vecs, lows) = orthonormalize_dd(&raw);
    let real_vecs = vecs
        .iter()
        .chain(&lows)
        .all(|v| v.iter().all(|z| z.im == 0.0));
    let mut traj = vec![vec![Dd::ZERO; dim]; times.len()];
    let mut eigvec_residual = 0.0f64;
    for (ti, rho) in states.iter().enumerate() {
        let m = rho.matrix();
        let real = real_vecs && m.as_slice().iter().all(|z| z.im == 0.0);
        let trace = (0..dim).fold(Dd::ZERO, |acc, i| acc + Dd::from(m[(i, i)].re));
        for (n, (v, lo)) in vecs.iter().zip(&lows).enumerate() {
            let w = m.mul_vec(v);
            let xi_f: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
            let res = w
                .iter()
                .zip(v)
                .map(|(b, a)| (b - a * xi_f).norm_sqr())
                .sum::<f64>()
                .sqrt();
            eigvec_residual = eigvec_residual.max(res);
            // ⟨v+δ|ρ|v+δ⟩ = ⟨v|ρ|v⟩ + 2 Re⟨δ|ρ|v⟩ + O(δ²), with δ ~ 1e-16.
            let cross: f64 = lo.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
            traj[ti][n] = (rayleigh(m, v, real) + Dd::from(2.0 * cross)) / trace;
        }
    }

    let design: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            distinct
                .iter()
                .map(|&g| (-gamma * g * t / 2.0).exp())
                .collect()
        })
        .collect();
    let one = Dd::from(1.0);
    let rhs: Vec<Vec<Dd>> = traj
        .iter()
        .map(|row| row.iter().map(|&xi| Dd::from(scale) * xi - one).collect())
        .collect();
    let coef = lstsq_dd(&design, &rhs)?;

    let mut max_residual = 0.0f64;
    for (ti, row) in design.iter().enumerate() {
        for n in 0..dim {
            let fit = row
                .iter()
                .zip(&coef)
                .fold(Dd::ZERO, |acc, (&d, c)| acc + Dd::from(d) * c[n]);
            let xi_fit = (one + fit) / Dd::from(scale);
            max_residual = max_residual.max((xi_fit - traj[ti][n]).to_f64().abs());
        }
    }
    let kappas: Vec<Vec<f64>> = (0..dim)
        .map(|n| coef.iter().map(|c| c[n].to_f64()).collect())
        .collect();
    let max_kappa_sum = coef
        .iter()
        .map(|c| c.iter().fold(Dd::ZERO, |acc, &k| acc + k).to_f64().abs())
        .fold(0.0, f64::max);
    let slowest_rate = distinct
        .iter()
        .enumerate()
        .filter(|(a, g)| **g > 0.0 && kappas.iter().any(|k| k[*a].abs() > KAPPA_SIGNIFICANCE))
        .map(|(_, g)| gamma * g / 2.0)
        .next();

    Ok(SpectrumCheck {
        gaps: distinct,
        kappas,
        max_residual,
        max_kappa_sum,
        slowest_rate,
        eigvec_residual,
    })
}

/// `⟨v|ρ|v⟩` with compensated sums, kept in double-double.
fn rayleigh(m: &CMatrix, v: &[C64], real: bool) -> Dd {
    let mut acc = Dot2::default();
    for (i, vi) in v.iter().enumerate() {
        let row = m.row(i);
        let mut wr = Dot2::default();
        if real {
            for (r, vj) in row.iter().zip(v) {
                wr.add_prod(r.re, vj.re);
            }
            acc.add_dd_prod(vi.re, wr.result());
        } else {
            let mut wi = Dot2::default();
            for (r, vj) in row.iter().zip(v) {
                wr.add_prod(r.re, vj.re);
                wr.add_prod(-r.im, vj.im);
                wi.add_prod(r.re, vj.im);
                wi.add_prod(r.im, vj.re);
            }
            // Re(conj(v_i) w_i)
            acc.add_dd_prod(vi.re, wr.result());
            acc.add_dd_prod(vi.im, wi.result());
        }
    }
    acc.result()
}

/// Two passes of modified Gram–Schmidt in double-double; returns the high
/// and low parts of each vector.
fn orthonormalize_dd(vecs: &[Vec<C64>]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    type Cdd = (Dd, Dd);
    fn dot(a: &[Cdd], b: &[Cdd]) -> Cdd {
        // ⟨a|b⟩
        let mut re = Dd::ZERO;
        let mut im = Dd::ZERO;
        for (x, y) in a.iter().zip(b) {
            re = re + x.0 * y.0 + x.1 * y.1;
            im = im + x.0 * y.1 - x.1 * y.0;
        }
        (re, im)
    }
    let real = vecs.iter().all(|v| v.iter().all(|z| z.im == 0.0));
    let mut out: Vec<Vec<Cdd>> = vecs
        .iter()
        .map(|v| v.iter().map(|z| (Dd::from(z.re), Dd::from(z.im))).collect())
        .collect();
    for _ in 0..2 {
        for n in 0..out.len() {
            let (done, rest) = out.split_at_mut(n);
            let v = &mut rest[0];
            for u in done.iter() {
                if real {
                    let pr = u
                        .iter()
                        .zip(v.iter())
                        .fold(Dd::ZERO, |acc, (x, y)| acc + x.0 * y.0);
                    for (x, a) in v.iter_mut().zip(u) {
                        x.0 = x.0 - a.0 * pr;
                    }
                } else {
                    let (pr, pi) = dot(u, v);
                    for (x, a) in v.iter_mut().zip(u) {
                        x.0 = x.0 - (a.0 * pr - a.1 * pi);
                        x.1 = x.1 - (a.0 * pi + a.1 * pr);
                    }
                }
            }
            let norm = dot(v, v).0.sqrt();
            for x in v.iter_mut() {
                x.0 = x.0 / norm;
                x.1 = x.1 / norm;
            }
        }
    }
    let hi = out
        .iter()
        .map(|v| v.iter().map(|x| C64::new(x.0.hi, x.1.hi)).collect())
        .collect();
    let lo = out
        .iter()
        .map(|v| v.iter().map(|x| C64::new(x.0.lo, x.1.lo)).collect())
        .collect();
    (hi, lo)
}
