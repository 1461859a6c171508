//! Exact evolution under commuting dephasing, probe states, the reduced
//! two-level dynamics of max-variance probes, and fidelity and purity.

use serde::{Deserialize, Serialize};

use crate::basis::{DiagonalOperatorSet, PairRates, SpinBasis};
use crate::error::{arg, Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64, ZERO};

/// Coupling constants: `x1` multiplies the Hamiltonian, `x2` the dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub x1: f64,
    pub x2: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl Couplings {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2, hbar: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x1.is_finite() {
            return arg(format!("x1 must be finite, got {}", self.x1));
        }
        if !(self.x2 >= 0.0) || !self.x2.is_finite() {
            return arg(format!(
                "x2 must be finite and nonnegative, got {}",
                self.x2
            ));
        }
        if !(self.hbar > 0.0) {
            return arg(format!("hbar must be positive, got {}", self.hbar));
        }
        Ok(())
    }
}

/// Estimated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    X1,
    X2,
}

/// Initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// `(|E_m⟩ + |E_M⟩)/√2` on the extremal Hamiltonian eigenstates.
    MaxVariance,
    /// `(|−⋯−⟩ + |+⋯+⟩)/√2`.
    Ghz,
    /// `⊗(cos φ |+⟩ + sin φ |−⟩)`, so `⟨σ^z⟩ = cos 2φ`.
    Product { phi: f64 },
    /// `(|v_0⟩ + |v_⌊N/2⌋⟩)/√2`.
    IsingMaxVariance,
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        if let Self::Product { phi } = *self {
            if !(phi > 0.0 && phi < std::f64::consts::FRAC_PI_2) {
                return arg(format!("phi must lie in (0, π/2), got {phi}"));
            }
        }
        Ok(())
    }

    /// `φ = π/4`, where the product-state precision scaling changes.
    pub fn is_singular(&self) -> bool {
        matches!(*self, Self::Product { phi } if (phi - std::f64::consts::FRAC_PI_4).abs() < 1e-12)
    }
}

/// Probe ket in the computational basis.
pub fn probe_ket(
    spec: &ProbeSpec,
    basis: &SpinBasis,
    diag: &DiagonalOperatorSet,
) -> Result<Vec<C64>> {
    spec.validate()?;
    let dim = basis.dim();
    if diag.dim() != dim {
        return Err(Error::Dimension(diag.dim(), dim));
    }
    let mut psi = vec![ZERO; dim];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *spec {
        ProbeSpec::MaxVariance => {
            let (m, big_m) = extremal_indices(&diag.hamiltonian_diag);
            if diag.hamiltonian_diag[m] == diag.hamiltonian_diag[big_m] {
                return Err(Error::DegenerateProbe(
                    "E_m = E_M; every state has zero energy variance, use the ising_max_variance construction \
                     or a Hamiltonian with nonzero spread"
                        .into(),
                ));
            }
            psi[m] = C64::new(h, 0.0);
            psi[big_m] = C64::new(h, 0.0);
        }
        ProbeSpec::Ghz => {
            psi[0] = C64::new(h, 0.0);
            psi[dim - 1] = C64::new(h, 0.0);
        }
        ProbeSpec::Product { phi } => {
            let (c, s) = (phi.cos(), phi.sin());
            for (i, amp) in psi.iter_mut().enumerate() {
                let plus = i.count_ones() as i32;
                let minus = basis.n_sites() as i32 - plus;
                *amp = C64::new(c.powi(plus) * s.powi(minus), 0.0);
            }
        }
        ProbeSpec::IsingMaxVariance => {
            let n = basis.n_sites();
            if n < 2 {
                return Err(Error::DegenerateProbe(
                    "the Ising max-variance probe needs at least two sites".into(),
                ));
            }
            psi[basis.reference(0)?] = C64::new(h, 0.0);
            psi[basis.reference(n / 2)?] = C64::new(h, 0.0);
        }
    }
    Ok(psi)
}

/// First argmin and first argmax.
pub(crate) fn extremal_indices(values: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = i;
        }
        if v > values[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

pub fn make_probe(
    spec: &ProbeSpec,
    basis: &SpinBasis,
    diag: &DiagonalOperatorSet,
) -> Result<DensityMatrix> {
    DensityMatrix::pure(&probe_ket(spec, basis, diag)?)
}

/// `ρ_ij(t) = ρ_ij(0) exp[(−i x1 ε_ij/ħ − x2 λ²_ij/2) t]`.
pub fn evolve_dephasing(
    rho0: &DensityMatrix,
    rates: &PairRates,
    c: &Couplings,
    t: f64,
) -> Result<DensityMatrix> {
    check_evolution(rho0, rates, c, t)?;
    let n = rho0.dim();
    let src = rho0.matrix();
    let m = CMatrix::from_fn(n, |i, j| {
        let r = src[(i, j)];
        if r == ZERO {
            return ZERO;
        }
        let expo = C64::new(
            -c.x2 * rates.lambda_sq(i, j) / 2.0 * t,
            -c.x1 * rates.eps(i, j) / c.hbar * t,
        );
        r * expo.exp()
    });
    Ok(DensityMatrix::from_raw(m))
}

/// Exact `∂ρ(t)/∂x` of the evolved state, for either coupling.
pub fn dephasing_derivative(
    rho_t: &DensityMatrix,
    rates: &PairRates,
    c: &Couplings,
    t: f64,
    which: Param,
) -> Result<CMatrix> {
    check_evolution(rho_t, rates, c, t)?;
    let src = rho_t.matrix();
    Ok(CMatrix::from_fn(rho_t.dim(), |i, j| {
        let factor = match which {
            Param::X1 => C64::new(0.0, -rates.eps(i, j) * t / c.hbar),
            Param::X2 => C64::new(-rates.lambda_sq(i, j) * t / 2.0, 0.0),
        };
        src[(i, j)] * factor
    }))
}

fn check_evolution(rho: &DensityMatrix, rates: &PairRates, c: &Couplings, t: f64) -> Result<()> {
    if rho.dim() != rates.dim() {
        return Err(Error::Dimension(rho.dim(), rates.dim()));
    }
    c.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return arg(format!("time must be finite and nonnegative, got {t}"));
    }
    Ok(())
}

/// Reduced description of a probe supported on two energy eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelProbe {
    /// `E_M − E_m`.
    pub eps: f64,
    /// `Σ_ν (λ_M^ν − λ_m^ν)²`.
    pub lambda_sq: f64,
    pub x1: f64,
    pub x2: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

impl TwoLevelProbe {
    pub fn new(eps: f64, lambda_sq: f64, c: Couplings) -> Result<Self> {
        c.validate()?;
        if !(eps >= 0.0) || !(lambda_sq >= 0.0) {
            return arg(format!(
                "need eps >= 0 and lambda_sq >= 0, got {eps}, {lambda_sq}"
            ));
        }
        Ok(Self {
            eps,
            lambda_sq,
            x1: c.x1,
            x2: c.x2,
            hbar: c.hbar,
        })
    }

    /// Reduced probe for the states `low` and `high` of a diagonal set.
    pub fn from_indices(
        diag: &DiagonalOperatorSet,
        low: usize,
        high: usize,
        c: Couplings,
    ) -> Result<Self> {
        let h = &diag.hamiltonian_diag;
        let lambda_sq = diag
            .lindblad_diags
            .iter()
            .map(|l| (l[high] - l[low]).powi(2))
            .sum();
        Self::new(h[high] - h[low], lambda_sq, c)
    }

    pub fn couplings(&self) -> Couplings {
        Couplings {
            x1: self.x1,
            x2: self.x2,
            hbar: self.hbar,
        }
    }

    /// `ħ / (x1 ε)`.
    pub fn tau_z(&self) -> f64 {
        self.hbar / (self.x1 * self.eps)
    }

    /// `4 / (x2 λ²)`.
    pub fn tau_d(&self) -> f64 {
        4.0 / (self.x2 * self.lambda_sq)
    }

    fn coherence(&self, t: f64) -> C64 {
        C64::from_polar(
            0.5 * (-self.x2 * self.lambda_sq * t / 2.0).exp(),
            self.x1 * self.eps * t / self.hbar,
        )
    }

    /// Analytic `∂ρ/∂x` of the 2×2 state.
    pub fn derivative(&self, t: f64, which: Param) -> CMatrix {
        let off = self.coherence(t)
            * match which {
                Param::X1 => C64::new(0.0, self.eps * t / self.hbar),
                Param::X2 => C64::new(-self.lambda_sq * t / 2.0, 0.0),
            };
        CMatrix::from_vec(2, vec![ZERO, off, off.conj(), ZERO]).expect("2x2")
    }

    pub fn with_x(&self, which: Param, value: f64) -> Self {
        let mut p = *self;
        match which {
            Param::X1 => p.x1 = value,
            Param::X2 => p.x2 = value,
        }
        p
    }
}

/// `ρ(t) = ½ [[1, c], [c*, 1]]` in the ordered basis `(|E_m⟩, |E_M⟩)` with
/// `c = e^{−2t/τ_D + i t/τ_Z}`.
pub fn two_level_state(probe: &TwoLevelProbe, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return arg(format!("time must be nonnegative, got {t}"));
    }
    let off = probe.coherence(t);
    let half = C64::new(0.5, 0.0);
    Ok(DensityMatrix::from_raw(CMatrix::from_vec(
        2,
        vec![half, off, off.conj(), half],
    )?))
}

/// Closed-form eigenvalues `(ξ+, ξ−) = ((1 ± e^{−2t/τ_D})/2)`.
pub fn two_level_eigenvalues(probe: &TwoLevelProbe, t: f64) -> (f64, f64) {
    let e = (-probe.x2 * probe.lambda_sq * t / 2.0).exp();
    (0.5 * (1.0 + e), 0.5 * (1.0 - e))
}

/// `tr(ρ_t ρ_0)`.
pub fn fidelity(rho_t: &DensityMatrix, rho0: &DensityMatrix) -> Result<f64> {
    if rho_t.dim() != rho0.dim() {
        return Err(Error::Dimension(rho_t.dim(), rho0.dim()));
    }
    let (a, b) = (rho_t.matrix(), rho0.matrix());
    let n = a.dim();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(s.re)
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, build_diagonals, pair_rates, HamiltonianSpec, LindbladSpec};

    fn chain(n: usize, k: usize, p: usize) -> (SpinBasis, DiagonalOperatorSet) {
        let b = build_basis(n).unwrap();
        let d = build_diagonals(
            &HamiltonianSpec::SpinChainUniform { k },
            &LindbladSpec::UncorrelatedPBody { p },
            &b,
        )
        .unwrap();
        (b, d)
    }

    #[test]
    fn ghz_bell_state() {
        let (b, d) = chain(2, 1, 1);
        let rho = make_probe(&ProbeSpec::Ghz, &b, &d).unwrap();
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert_eq!(rho[(1, 1)], ZERO);
    }

    #[test]
    fn product_single_spin_polarization() {
        let (b, d) = chain(1, 1, 1);
        let phi = 0.3;
        let rho = make_probe(&ProbeSpec::Product { phi }, &b, &d).unwrap();
        let sz = rho[(1, 1)].re - rho[(0, 0)].re;
        assert!((sz - (2.0 * phi).cos()).abs() < 1e-15);
        assert!(rho[(0, 1)].norm() > 0.0);
        assert!(ProbeSpec::Product { phi: 0.0 }.validate().is_err());
    }

    #[test]
    fn ising_probe_support() {
        let b = build_basis(4).unwrap();
        let d = build_diagonals(
            &HamiltonianSpec::LongRangeIsing { alpha: 1.0 },
            &LindbladSpec::UncorrelatedPBody { p: 1 },
            &b,
        )
        .unwrap();
        let psi = probe_ket(&ProbeSpec::IsingMaxVariance, &b, &d).unwrap();
        let support: Vec<usize> = (0..16).filter(|&i| psi[i] != ZERO).collect();
        assert_eq!(support, vec![0, 0b1100]);
    }

    #[test]
    fn max_variance_rejects_flat_spectrum() {
        let b = build_basis(2).unwrap();
        let d = build_diagonals(
            &HamiltonianSpec::CustomDiagonal {
                values: vec![1.0; 4],
            },
            &LindbladSpec::UncorrelatedPBody { p: 1 },
            &b,
        )
        .unwrap();
        let e = make_probe(&ProbeSpec::MaxVariance, &b, &d).unwrap_err();
        assert!(e.to_string().contains("ising_max_variance"));
    }

    #[test]
    fn evolution_limits() {
        let (b, d) = chain(3, 1, 1);
        let r = pair_rates(&d);
        let rho0 = make_probe(&ProbeSpec::Product { phi: 0.4 }, &b, &d).unwrap();
        let c = Couplings::new(1.0, 0.7);
        assert_eq!(evolve_dephasing(&rho0, &r, &c, 0.0).unwrap(), rho0);
        let unitary = evolve_dephasing(&rho0, &r, &Couplings::new(1.0, 0.0), 2.0).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((unitary[(i, j)].norm() - rho0[(i, j)].norm()).abs() < 1e-15);
            }
        }
        assert!(evolve_dephasing(&rho0, &r, &c, -1.0).is_err());
        assert!(evolve_dephasing(&rho0, &r, &Couplings::new(1.0, -0.1), 1.0).is_err());
    }

    #[test]
    fn two_level_eigen_examples() {
        let p = TwoLevelProbe::new(2.0, 4.0, Couplings::new(1.0, 1.0)).unwrap();
        assert_eq!(two_level_eigenvalues(&p, 0.0), (1.0, 0.0));
        let (a, b) = two_level_eigenvalues(&p, p.tau_d() * std::f64::consts::LN_2 / 2.0);
        assert!((a - 0.75).abs() < 1e-15 && (b - 0.25).abs() < 1e-15);
        let (a, b) = two_level_eigenvalues(&p, 1e3);
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_and_purity_closed_forms() {
        let p = TwoLevelProbe::new(2.0, 4.0, Couplings::new(1.3, 0.8)).unwrap();
        let rho0 = two_level_state(&p, 0.0).unwrap();
        for &t in &[0.0, 0.1, 0.5, 2.0] {
            let rho = two_level_state(&p, t).unwrap();
            let f = fidelity(&rho, &rho0).unwrap();
            let expect = 0.5 * (1.0 + (-2.0 * t / p.tau_d()).exp() * (t / p.tau_z()).cos());
            assert!((f - expect).abs() < 1e-15);
            let pur = purity(&rho);
            assert!((pur - 0.5 * (1.0 + (-4.0 * t / p.tau_d()).exp())).abs() < 1e-15);
        }
        let pur = purity(&two_level_state(&p, p.tau_d() / 4.0).unwrap());
        assert!((pur - 0.683_939_720_585_721_2).abs() < 1e-12);

        let unitary = p.with_x(Param::X2, 0.0);
        let f = fidelity(
            &two_level_state(&unitary, std::f64::consts::PI * unitary.tau_z()).unwrap(),
            &rho0,
        )
        .unwrap();
        assert!(f.abs() < 1e-15);
        let f = fidelity(&two_level_state(&p, 50.0 * p.tau_d()).unwrap(), &rho0).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
    }
}
