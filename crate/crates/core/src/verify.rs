//! Cross-checks of the closed-form paths against the brute-force oracle,
//! packaged as named suites over a scenario corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{
    build_basis, build_diagonals, gap_spectrum_from_reference, min_nonzero_gap, pair_rates,
    DiagonalOperatorSet, HamiltonianSpec, LindbladSpec, PairRates,
};
use crate::dynamics::{
    dephasing_derivative, evolve_dephasing, make_probe, Couplings, Param, ProbeSpec,
};
use crate::error::{arg, Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64};
use crate::oracle::{
    hermitian_eigendecomposition, integrate_adaptive, product_state_spectrum_check,
    reconstruction_residuals, MasterEquationProblem, ORACLE_SITE_LIMIT,
};
use crate::qfi::{qfi_offdiagonal, qfi_report, qfi_report_with_joint, QfiReport};
use crate::scaling::probe_timescales;

pub const DEFAULT_SEED: u64 = 0x5EED;

pub const ORACLE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const SANDWICH_SLACK: f64 = 1e-9;
pub const JOINT_TERM_TOL: f64 = 1e-8;
pub const SPECTRUM_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-10;

/// One commuting-dephasing setup with explicit sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n_sites: usize,
    pub hamiltonian: HamiltonianSpec,
    pub lindblad: LindbladSpec,
    pub probe: ProbeSpec,
    pub x1: f64,
    pub x2: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub times: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

/// Everything a check needs, built once per scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub diag: DiagonalOperatorSet,
    pub rates: PairRates,
    pub rho0: DensityMatrix,
    pub couplings: Couplings,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_sites > ORACLE_SITE_LIMIT {
            return Err(Error::Capacity {
                what: "oracle sites",
                requested: self.n_sites,
                limit: ORACLE_SITE_LIMIT,
            });
        }
        self.hamiltonian.validate(self.n_sites)?;
        self.lindblad.validate(self.n_sites)?;
        self.probe.validate()?;
        Couplings {
            x1: self.x1,
            x2: self.x2,
            hbar: self.hbar,
        }
        .validate()?;
        if self.times.is_empty() || self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return arg(format!(
                "scenario {}: times must be a nonempty list of finite t >= 0",
                self.name
            ));
        }
        Ok(())
    }

    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let basis = build_basis(self.n_sites)?;
        let diag = build_diagonals(&self.hamiltonian, &self.lindblad, &basis)?;
        let rates = pair_rates(&diag);
        let rho0 = make_probe(&self.probe, &basis, &diag)?;
        Ok(Prepared {
            diag,
            rates,
            rho0,
            couplings: Couplings {
                x1: self.x1,
                x2: self.x2,
                hbar: self.hbar,
            },
        })
    }

    /// Replaces `times` by `fractions` of the shorter of τ_Z and τ_D.
    pub fn with_relative_times(mut self, fractions: &[f64]) -> Result<Self> {
        self.times = vec![0.0];
        let p = self.prepare()?;
        let ts = probe_timescales(&p.rho0, &p.diag, &p.couplings)?;
        let tau = ts.tau_z.min(ts.tau_d);
        self.times = fractions.iter().map(|f| f * tau).collect();
        Ok(self)
    }
}

/// Which suite a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    OracleEquivalence,
    BoundSandwich,
    JointTerm,
    SpectrumStructure,
    EigenSelfTest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub scenario: String,
    pub passed: bool,
    /// The quantity compared against `tolerance`.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// Test-only corruption of the closed-form rate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fault {
    /// Multiplies every energy difference ε_ij.
    pub eps_scale: f64,
}

/// Closed-form evolution vs RK4 integration of the master equation, plus
/// trace and positivity of the oracle states.
pub fn check_oracle_equivalence(s: &Scenario) -> Result<CheckResult> {
    let p = s.prepare()?;
    let problem = MasterEquationProblem::from_diagonals(&p.diag, s.x1, s.x2, s.hbar)?;
    let states = integrate_adaptive(&problem, &p.rho0, &s.times, None)?;
    let mut worst = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut trace_drift = 0.0f64;
    for (t, rho) in s.times.iter().zip(&states) {
        let exact = evolve_dephasing(&p.rho0, &p.rates, &p.couplings, *t)?;
        worst = worst.max(rho.matrix().max_abs_diff(exact.matrix()));
        min_eig = min_eig.min(rho.min_eigenvalue()?);
        trace_drift = trace_drift.max((rho.trace() - 1.0).abs());
    }
    Ok(CheckResult {
        suite: Suite::OracleEquivalence,
        scenario: s.name.clone(),
        passed: worst <= ORACLE_TOL && min_eig >= -POSITIVITY_TOL && trace_drift <= 1e-10,
        metric: worst,
        tolerance: ORACLE_TOL,
        detail: format!(
            "max |Δρ_ij| {worst:.3e}, min eigenvalue {min_eig:.3e}, trace drift {trace_drift:.3e}"
        ),
    })
}

/// `lower ≤ F_x1 ≤ upper` at every sample time, with slack relative to the
/// size of the upper bound.
pub fn check_bound_sandwich(s: &Scenario, fault: Option<Fault>) -> Result<CheckResult> {
    let mut p = s.prepare()?;
    if let Some(f) = fault {
        p.rates.corrupt_eps(f.eps_scale);
    }
    let mut sandwich = SandwichTracker::default();
    for &t in &s.times {
        let rho = evolve_dephasing(&p.rho0, &p.rates, &p.couplings, t)?;
        let d = dephasing_derivative(&rho, &p.rates, &p.couplings, t, Param::X1)?;
        sandwich.add(&qfi_report(&rho, &d, &p.diag, t, s.hbar, 1.0)?, t);
    }
    Ok(sandwich.finish(&s.name))
}

/// `|F_12|` of the two couplings, which vanishes under pure dephasing.
pub fn check_joint_term(s: &Scenario) -> Result<CheckResult> {
    let p = s.prepare()?;
    let mut worst = 0.0f64;
    for &t in &s.times {
        let rho = evolve_dephasing(&p.rho0, &p.rates, &p.couplings, t)?;
        let d1 = dephasing_derivative(&rho, &p.rates, &p.couplings, t, Param::X1)?;
        let d2 = dephasing_derivative(&rho, &p.rates, &p.couplings, t, Param::X2)?;
        worst = worst.max(qfi_offdiagonal(&rho, &d1, &d2)?.abs());
    }
    Ok(joint_result(&s.name, worst))
}

/// Sandwich and joint-term checks sharing one eigendecomposition per time.
pub fn check_sandwich_and_joint(s: &Scenario) -> Result<(CheckResult, CheckResult)> {
    let p = s.prepare()?;
    let mut sandwich = SandwichTracker::default();
    let mut joint = 0.0f64;
    for &t in &s.times {
        let rho = evolve_dephasing(&p.rho0, &p.rates, &p.couplings, t)?;
        let d1 = dephasing_derivative(&rho, &p.rates, &p.couplings, t, Param::X1)?;
        let d2 = dephasing_derivative(&rho, &p.rates, &p.couplings, t, Param::X2)?;
        let (r, f12) = qfi_report_with_joint(&rho, &d1, &d2, &p.diag, t, s.hbar, 1.0)?;
        sandwich.add(&r, t);
        joint = joint.max(f12.abs());
    }
    Ok((sandwich.finish(&s.name), joint_result(&s.name, joint)))
}

struct SandwichTracker {
    worst: f64,
    at: f64,
}

impl Default for SandwichTracker {
    fn default() -> Self {
        Self {
            worst: f64::NEG_INFINITY,
            at: 0.0,
        }
    }
}

impl SandwichTracker {
    /// Violation relative to `max(upper, 1)`; negative when strictly inside.
    fn add(&mut self, r: &QfiReport, t: f64) {
        let scale = r.upper_bound.abs().max(1.0);
        let violation = ((r.lower_bound - r.qfi) / scale).max((r.qfi - r.upper_bound) / scale);
        if violation > self.worst {
            self.worst = violation;
            self.at = t;
        }
    }

    fn finish(self, name: &str) -> CheckResult {
        CheckResult {
            suite: Suite::BoundSandwich,
            scenario: name.to_string(),
            passed: self.worst <= SANDWICH_SLACK,
            metric: self.worst,
            tolerance: SANDWICH_SLACK,
            detail: format!(
                "largest relative violation {:.3e} at t = {:.6e}",
                self.worst, self.at
            ),
        }
    }
}

fn joint_result(name: &str, worst: f64) -> CheckResult {
    CheckResult {
        suite: Suite::JointTerm,
        scenario: name.to_string(),
        passed: worst < JOINT_TERM_TOL,
        metric: worst,
        tolerance: JOINT_TERM_TOL,
        detail: format!("max |F_12| {worst:.3e}"),
    }
}

/// Eigenvalue structure of the uniform product state (φ = π/4) under pure
/// p-body dephasing with rate γ: exponential fit, vanishing κ-sums, and the
/// slowest decay at `γΛ₁²/2`.
pub fn check_spectrum_structure(n: usize, p: usize, gamma: f64) -> Result<CheckResult> {
    let name = format!("product n={n} p={p}");
    let s = Scenario {
        name: name.clone(),
        n_sites: n,
        hamiltonian: HamiltonianSpec::SpinChainUniform { k: 1 },
        lindblad: LindbladSpec::UncorrelatedPBody { p },
        probe: ProbeSpec::Product {
            phi: std::f64::consts::FRAC_PI_4,
        },
        x1: 0.0,
        x2: gamma,
        hbar: 1.0,
        times: vec![0.0],
    };
    let prep = s.prepare()?;
    let gaps = gap_spectrum_from_reference(n, p)?;
    let lambda1 = match min_nonzero_gap(n, p) {
        Ok(g) => g,
        // Outside the closed form's range, use the enumerated minimum.
        Err(_) => gaps
            .iter()
            .map(|g| g.1)
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min),
    };
    let mut distinct: Vec<f64> = gaps.iter().map(|g| g.1).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    // Chebyshev nodes in z = e^{−γΛ₁²t/2} ∈ (0, 1) keep the exponential
    // design matrix far better conditioned than a uniform time grid.
    let m = 8 * distinct.len();
    let slow = gamma * lambda1 / 2.0;
    let times: Vec<f64> = (0..m)
        .map(|i| {
            let z = 0.5 * (1.0 + (std::f64::consts::PI * (i as f64 + 0.5) / m as f64).cos());
            -z.ln() / slow
        })
        .collect();
    let states = times
        .iter()
        .map(|&t| evolve_dephasing(&prep.rho0, &prep.rates, &prep.couplings, t))
        .collect::<Result<Vec<_>>>()?;
    let sc = product_state_spectrum_check(&states, &times, &gaps, gamma)?;
    let slowest_ok = sc
        .slowest_rate
        .is_some_and(|r| (r - gamma * lambda1 / 2.0).abs() <= 1e-9 * r);
    let metric = sc.max_residual.max(sc.max_kappa_sum);
    Ok(CheckResult {
        suite: Suite::SpectrumStructure,
        scenario: name,
        passed: sc.max_residual < SPECTRUM_TOL && sc.max_kappa_sum < SPECTRUM_TOL && slowest_ok,
        metric,
        tolerance: SPECTRUM_TOL,
        detail: format!(
            "fit residual {:.3e}, max |Σκ| {:.3e}, slowest rate {:?} vs γΛ₁²/2 = {}",
            sc.max_residual,
            sc.max_kappa_sum,
            sc.slowest_rate,
            gamma * lambda1 / 2.0
        ),
    })
}

/// Random Hermitian matrix with entries uniform in [−1, 1].
pub fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let re = rng.gen_range(-1.0..1.0);
            let im = if i == j {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            };
            m.as_mut_slice()[i * dim + j] = C64::new(re, im);
            m.as_mut_slice()[j * dim + i] = C64::new(re, -im);
        }
    }
    m
}

/// Reconstruction and orthonormality of the eigensolver on a seeded matrix.
pub fn check_eigen_self_test(dim: usize, seed: u64) -> Result<CheckResult> {
    let m = random_hermitian(dim, seed);
    let eig = hermitian_eigendecomposition(&m)?;
    let (rel, orth) = reconstruction_residuals(&m, &eig);
    let metric = rel.max(orth);
    Ok(CheckResult {
        suite: Suite::EigenSelfTest,
        scenario: format!("random hermitian dim={dim} seed={seed:#x}"),
        passed: metric < EIGEN_TOL,
        metric,
        tolerance: EIGEN_TOL,
        detail: format!("reconstruction {rel:.3e}, orthonormality {orth:.3e}"),
    })
}

/// Commuting scenarios covering N = 3..8 and several body orders.
pub fn default_corpus() -> Result<Vec<Scenario>> {
    let phi = ProbeSpec::Product {
        phi: std::f64::consts::FRAC_PI_8,
    };
    let table: [(usize, usize, usize, ProbeSpec); 12] = [
        (3, 1, 1, ProbeSpec::Ghz),
        (3, 2, 1, phi.clone()),
        (4, 2, 2, ProbeSpec::MaxVariance),
        (4, 1, 1, phi.clone()),
        (5, 2, 1, ProbeSpec::MaxVariance),
        (5, 3, 2, phi.clone()),
        (6, 1, 1, phi.clone()),
        (6, 2, 2, ProbeSpec::MaxVariance),
        (7, 2, 1, phi.clone()),
        (7, 3, 2, ProbeSpec::Ghz),
        (8, 1, 1, ProbeSpec::Ghz),
        (8, 2, 2, phi),
    ];
    let fractions = [0.1, 0.25, 0.5, 1.0, 2.0];
    table
        .into_iter()
        .map(|(n, k, p, probe)| {
            let kind = match probe {
                ProbeSpec::Ghz => "ghz",
                ProbeSpec::MaxVariance => "max_variance",
                _ => "product",
            };
            Scenario {
                name: format!("{kind} n={n} k={k} p={p}"),
                n_sites: n,
                hamiltonian: HamiltonianSpec::SpinChainUniform { k },
                lindblad: LindbladSpec::UncorrelatedPBody { p },
                probe,
                x1: 1.0,
                x2: 0.3,
                hbar: 1.0,
                times: vec![],
            }
            .with_relative_times(&fractions)
        })
        .collect()
}

/// Every `N ≤ 8`, `k, p ≤ 3` chain with max-variance, GHZ and product
/// (φ = π/8, 3π/8) probes at five times. GHZ probes with equal branch
/// energies (even k) have no Zeno time and are left out.
pub fn sandwich_corpus() -> Result<Vec<Scenario>> {
    use std::f64::consts::FRAC_PI_8;
    let probes = [
        ("max_variance", ProbeSpec::MaxVariance),
        ("ghz", ProbeSpec::Ghz),
        ("product_pi/8", ProbeSpec::Product { phi: FRAC_PI_8 }),
        (
            "product_3pi/8",
            ProbeSpec::Product {
                phi: 3.0 * FRAC_PI_8,
            },
        ),
    ];
    let fractions = [0.1, 0.25, 0.5, 1.0, 2.0];
    let mut out = Vec::new();
    for n in 3..=ORACLE_SITE_LIMIT {
        for k in 1..=3 {
            for p in 1..=3 {
                for (kind, probe) in &probes {
                    let s = Scenario {
                        name: format!("{kind} n={n} k={k} p={p}"),
                        n_sites: n,
                        hamiltonian: HamiltonianSpec::SpinChainUniform { k },
                        lindblad: LindbladSpec::UncorrelatedPBody { p },
                        probe: probe.clone(),
                        x1: 1.0,
                        x2: 0.3,
                        hbar: 1.0,
                        times: vec![],
                    };
                    match s.with_relative_times(&fractions) {
                        Ok(s) => out.push(s),
                        Err(Error::DegenerateProbe(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `(n, p)` pairs for the spectrum-structure suite.
pub fn spectrum_corpus() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 3..=ORACLE_SITE_LIMIT {
        for p in 1..=3.min(n - 1) {
            out.push((n, p));
        }
    }
    out
}

/// Every suite over the corpus, sequentially.
pub fn run_all(corpus: &[Scenario], fault: Option<Fault>, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for s in corpus {
        checks.push(check_oracle_equivalence(s)?);
        match fault {
            Some(_) => {
                checks.push(check_bound_sandwich(s, fault)?);
                checks.push(check_joint_term(s)?);
            }
            None => {
                let (sandwich, joint) = check_sandwich_and_joint(s)?;
                checks.push(sandwich);
                checks.push(joint);
            }
        }
    }
    for (n, p) in spectrum_corpus() {
        checks.push(check_spectrum_structure(n, p, 1.0)?);
    }
    checks.push(check_eigen_self_test(64, seed)?);
    Ok(VerifyReport::new(checks))
}
