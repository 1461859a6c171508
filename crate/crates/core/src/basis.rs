//! Computational basis of N two-level systems, σ^z-product spectra and the
//! counting formulas built on them.
//!
//! Bit convention: bit `s - 1` of a basis index is 1 when site `s` is in the
//! `|+⟩` eigenstate (single-body eigenvalue +1) and 0 for `|−⟩`. Site 1 is the
//! least significant bit. The reference vector `|v_q⟩` has the top `q` sites
//! in `|+⟩`, written `|−…−+…+⟩` with site 1 on the left.

use serde::{Deserialize, Serialize};

use crate::binomial::{binom, choose, choose_exact};
use crate::error::{arg, Error, Result};

/// Default cap on the number of sites for dense (2^N-sized) objects.
pub const DEFAULT_DENSE_LIMIT: usize = 14;

/// Ordered computational basis. The index↔bitword map is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinBasis {
    n_sites: usize,
}

pub fn build_basis(n_sites: usize) -> Result<SpinBasis> {
    build_basis_with_limit(n_sites, DEFAULT_DENSE_LIMIT)
}

pub fn build_basis_with_limit(n_sites: usize, limit: usize) -> Result<SpinBasis> {
    if n_sites == 0 {
        return arg("a basis needs at least one site");
    }
    if n_sites > limit || n_sites >= usize::BITS as usize {
        return Err(Error::Capacity {
            what: "site count",
            requested: n_sites,
            limit,
        });
    }
    Ok(SpinBasis { n_sites })
}

impl SpinBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn bits(&self, index: usize) -> u64 {
        debug_assert!(index < self.dim());
        index as u64
    }

    pub fn index_of(&self, bits: u64) -> Option<usize> {
        ((bits as usize) < self.dim()).then_some(bits as usize)
    }

    /// Single-site eigenvalue (±1) of site `site` (1-based).
    pub fn spin(&self, index: usize, site: usize) -> i8 {
        if (index >> (site - 1)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn plus_count(&self, index: usize) -> usize {
        index.count_ones() as usize
    }

    /// Index of `|v_q⟩`.
    pub fn reference(&self, q: usize) -> Result<usize> {
        if q > self.n_sites {
            return arg(format!("reference q = {q} exceeds N = {}", self.n_sites));
        }
        Ok(reference_index(self.n_sites, q))
    }

    /// Index of the global spin flip of `index`.
    pub fn flip(&self, index: usize) -> usize {
        index ^ (self.dim() - 1)
    }
}

pub(crate) fn reference_index(n: usize, q: usize) -> usize {
    ((1usize << q) - 1) << (n - q)
}

/// Eigenvalue of `σ^z_{i1}⋯σ^z_{ik}` on a basis state; sites are 1-based and
/// strictly increasing.
pub fn zprod_eigenvalue(basis: &SpinBasis, state_index: usize, sites: &[usize]) -> Result<i8> {
    if state_index >= basis.dim() {
        return arg(format!("state index {state_index} out of range"));
    }
    let mut prev = 0;
    let mut sign = 1i8;
    for &s in sites {
        if s == 0 || s > basis.n_sites {
            return arg(format!("site {s} outside 1..={}", basis.n_sites));
        }
        if s <= prev {
            return arg("sites must be strictly increasing and distinct");
        }
        prev = s;
        sign *= basis.spin(state_index, s);
    }
    Ok(sign)
}

/// Multiplicities of the eigenvalues +1 and −1 of all k-body σ^z products
/// on `|v_q⟩`. Returned as `(count_plus, count_minus)`.
pub fn kbody_degeneracy(n: usize, k: usize, q: usize) -> Result<(u128, u128)> {
    if k == 0 || k > n {
        return arg(format!("body order k = {k} outside 1..={n}"));
    }
    if q > n {
        return arg(format!("plus count q = {q} exceeds n = {n}"));
    }
    let overflow = || Error::Capacity {
        what: "exact binomial argument",
        requested: n,
        limit: crate::binomial::EXACT_LIMIT as usize,
    };
    let (n, k, q) = (n as i64, k as i64, q as i64);
    let mut odd = 0u128;
    let mut even = 0u128;
    for j in 0..=k {
        let term = choose_exact(q, j)
            .zip(choose_exact(n - q, k - j))
            .and_then(|(a, b)| a.checked_mul(b))
            .ok_or_else(overflow)?;
        if j % 2 == 1 {
            odd += term;
        } else {
            even += term;
        }
    }
    // A tuple with j plus sites has eigenvalue (−1)^(k−j).
    Ok(if k % 2 == 1 { (odd, even) } else { (even, odd) })
}

/// `Σ_ν (λ^ν_{v_0} − λ^ν_{v_q})²` for uncorrelated p-body σ^z products,
/// for every `q = 1..=n`.
pub fn gap_spectrum_from_reference(n: usize, p: usize) -> Result<Vec<(usize, f64)>> {
    if p == 0 || p > n {
        return arg(format!("body order p = {p} outside 1..={n}"));
    }
    Ok((1..=n).map(|q| (q, hamming_gap(n, p, q))).collect())
}

/// λ² between two states that differ on `d` sites.
pub(crate) fn hamming_gap(n: usize, p: usize, d: usize) -> f64 {
    let (n, p, d) = (n as i64, p as i64, d as i64);
    let mut s = 0.0;
    let mut j = 1;
    while j <= p {
        s += choose(d, j) * choose(n - d, p - j);
        j += 2;
    }
    4.0 * s
}

/// Smallest nonzero gap `4·C(n−1, p−1)`, valid for `p < ⌊n/2⌋`.
pub fn min_nonzero_gap(n: usize, p: usize) -> Result<f64> {
    if p == 0 {
        return arg("body order p must be positive");
    }
    if p >= n / 2 {
        return Err(Error::Domain(format!(
            "the minimal-gap closed form needs p < ⌊n/2⌋ (p = {p}, n = {n})"
        )));
    }
    Ok(4.0 * binom(n as u64 - 1, p as u64 - 1))
}

/// Diagonal many-body Hamiltonians. The overall coupling is factored out as
/// the estimated parameter `x1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// Sum over all k-tuples of products of a single-body operator with
    /// eigenvalues `eps_m` on `|−⟩` and `eps_M` on `|+⟩`.
    SymmetrizedUniform {
        k: usize,
        eps_m: f64,
        #[serde(rename = "eps_M")]
        eps_big_m: f64,
    },
    /// `−Σ_{i<j} s_i s_j / |i−j|^α`.
    LongRangeIsing {
        alpha: f64,
    },
    /// Sum over all k-tuples of σ^z products.
    SpinChainUniform {
        k: usize,
    },
    CustomDiagonal {
        values: Vec<f64>,
    },
}

impl HamiltonianSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Self::SymmetrizedUniform {
                k,
                eps_m,
                eps_big_m,
            } => {
                check_order("k", k, n)?;
                if !(eps_m <= eps_big_m) {
                    return arg(format!("need eps_m <= eps_M, got {eps_m} > {eps_big_m}"));
                }
            }
            Self::SpinChainUniform { k } => check_order("k", k, n)?,
            Self::LongRangeIsing { alpha } => {
                if !(alpha >= 0.0) || !alpha.is_finite() {
                    return arg(format!("alpha must be finite and >= 0, got {alpha}"));
                }
            }
            Self::CustomDiagonal { ref values } => {
                if n < usize::BITS as usize && values.len() != 1 << n {
                    return Err(Error::Dimension(values.len(), 1 << n));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return arg("custom diagonal has non-finite entries");
                }
            }
        }
        Ok(())
    }

    /// Body order for σ^z-product forms.
    pub fn body_order(&self) -> Option<usize> {
        match *self {
            Self::SymmetrizedUniform { k, .. } | Self::SpinChainUniform { k } => Some(k),
            Self::LongRangeIsing { .. } => Some(2),
            Self::CustomDiagonal { .. } => None,
        }
    }
}

/// σ^z-product Lindblad operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LindbladSpec {
    /// One operator per p-tuple of sites.
    UncorrelatedPBody { p: usize },
    /// A single operator: the sum of all k-body σ^z products.
    CollectiveSymmetrizedKBody { k: usize },
}

impl LindbladSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Self::UncorrelatedPBody { p } => check_order("p", p, n),
            Self::CollectiveSymmetrizedKBody { k } => check_order("k", k, n),
        }
    }

    pub fn body_order(&self) -> usize {
        match *self {
            Self::UncorrelatedPBody { p } => p,
            Self::CollectiveSymmetrizedKBody { k } => k,
        }
    }
}

fn check_order(name: &str, k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        arg(format!("body order {name} = {k} outside 1..={n}"))
    } else {
        Ok(())
    }
}

/// Per-state eigenvalues of the Hamiltonian and of every Lindblad operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperatorSet {
    pub n_sites: usize,
    pub hamiltonian_diag: Vec<f64>,
    pub lindblad_diags: Vec<Vec<f64>>,
    pub collective: bool,
}

impl DiagonalOperatorSet {
    pub fn dim(&self) -> usize {
        self.hamiltonian_diag.len()
    }
}

/// Cap on stored Lindblad table entries (operators × states).
const LINDBLAD_TABLE_LIMIT: usize = 1 << 26;

pub fn build_diagonals(
    spec_h: &HamiltonianSpec,
    spec_l: &LindbladSpec,
    basis: &SpinBasis,
) -> Result<DiagonalOperatorSet> {
    let n = basis.n_sites();
    spec_h.validate(n)?;
    spec_l.validate(n)?;
    let dim = basis.dim();

    let hamiltonian_diag: Vec<f64> = match spec_h {
        HamiltonianSpec::SymmetrizedUniform {
            k,
            eps_m,
            eps_big_m,
        } => {
            let by_q: Vec<f64> = (0..=n)
                .map(|q| symmetric_value(n, *k, q, *eps_m, *eps_big_m))
                .collect();
            (0..dim).map(|i| by_q[basis.plus_count(i)]).collect()
        }
        HamiltonianSpec::SpinChainUniform { k } => {
            let by_q: Vec<f64> = (0..=n)
                .map(|q| symmetric_value(n, *k, q, -1.0, 1.0))
                .collect();
            (0..dim).map(|i| by_q[basis.plus_count(i)]).collect()
        }
        HamiltonianSpec::LongRangeIsing { alpha } => {
            let coupling = ising_couplings(n, *alpha);
            (0..dim)
                .map(|i| ising_energy(basis, i, &coupling))
                .collect()
        }
        HamiltonianSpec::CustomDiagonal { values } => values.clone(),
    };

    let (lindblad_diags, collective) = match *spec_l {
        LindbladSpec::UncorrelatedPBody { p } => {
            let count = binom(n as u64, p as u64);
            if count * dim as f64 > LINDBLAD_TABLE_LIMIT as f64 {
                return Err(Error::Capacity {
                    what: "Lindblad table size",
                    requested: (count * dim as f64) as usize,
                    limit: LINDBLAD_TABLE_LIMIT,
                });
            }
            let diags = combinations(n, p)
                .into_iter()
                .map(|tuple| {
                    let mask: usize = tuple.iter().map(|s| 1usize << (s - 1)).sum();
                    (0..dim)
                        .map(|i| {
                            if (!i & mask).count_ones() % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        })
                        .collect()
                })
                .collect();
            (diags, false)
        }
        LindbladSpec::CollectiveSymmetrizedKBody { k } => {
            let by_q: Vec<f64> = (0..=n)
                .map(|q| symmetric_value(n, k, q, -1.0, 1.0))
                .collect();
            (
                vec![(0..dim).map(|i| by_q[basis.plus_count(i)]).collect()],
                true,
            )
        }
    };

    Ok(DiagonalOperatorSet {
        n_sites: n,
        hamiltonian_diag,
        lindblad_diags,
        collective,
    })
}

/// `Σ_s C(q,s) C(n−q,k−s) e_M^s e_m^(k−s)`: value of a symmetrized k-body
/// product on any state with `q` plus sites.
pub(crate) fn symmetric_value(n: usize, k: usize, q: usize, eps_m: f64, eps_big_m: f64) -> f64 {
    let (ni, ki, qi) = (n as i64, k as i64, q as i64);
    (0..=ki)
        .map(|s| {
            choose(qi, s)
                * choose(ni - qi, ki - s)
                * eps_big_m.powi(s as i32)
                * eps_m.powi((ki - s) as i32)
        })
        .sum()
}

/// `J(d) = d^−α` for `d = 1..n−1` (index 0 unused).
fn ising_couplings(n: usize, alpha: f64) -> Vec<f64> {
    (0..n)
        .map(|d| if d == 0 { 0.0 } else { (d as f64).powf(-alpha) })
        .collect()
}

fn ising_energy(basis: &SpinBasis, index: usize, coupling: &[f64]) -> f64 {
    let n = basis.n_sites();
    let mut e = 0.0;
    for i in 1..=n {
        let si = basis.spin(index, i) as f64;
        for j in i + 1..=n {
            e -= si * basis.spin(index, j) as f64 * coupling[j - i];
        }
    }
    e
}

/// All strictly increasing k-tuples of sites `1..=n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Coherent and dissipative rates for every index pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRates {
    dim: usize,
    eps: Vec<f64>,
    lambda_sq: Vec<f64>,
}

impl PairRates {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ε_ij = E_i − E_j`.
    pub fn eps(&self, i: usize, j: usize) -> f64 {
        self.eps[i * self.dim + j]
    }

    /// `λ²_ij = Σ_ν (λ_i^ν − λ_j^ν)²`.
    pub fn lambda_sq(&self, i: usize, j: usize) -> f64 {
        self.lambda_sq[i * self.dim + j]
    }

    /// Multiplies every coherent rate by `factor`. Only used to inject
    /// faults when exercising the verification suites.
    pub fn corrupt_eps(&mut self, factor: f64) {
        for e in &mut self.eps {
            *e *= factor;
        }
    }
}

pub fn pair_rates(diag: &DiagonalOperatorSet) -> PairRates {
    let dim = diag.dim();
    let h = &diag.hamiltonian_diag;
    let mut eps = vec![0.0; dim * dim];
    let mut lambda_sq = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            eps[i * dim + j] = h[i] - h[j];
        }
    }
    for l in &diag.lindblad_diags {
        for i in 0..dim {
            let row = &mut lambda_sq[i * dim..(i + 1) * dim];
            for (j, out) in row.iter_mut().enumerate() {
                let d = l[i] - l[j];
                *out += d * d;
            }
        }
    }
    PairRates {
        dim,
        eps,
        lambda_sq,
    }
}
