//! Long-range Ising chain `H = −Σ_{i<j} s_i s_j / |i−j|^α`.

use serde::Serialize;

use super::timescales::TimescaleReport;
use crate::binomial::choose;
use crate::dynamics::Couplings;
use crate::error::{arg, Result};

/// `P(x) = Σ_{d=1}^{x} d^{−α}` for `x = 0..=n`.
fn prefix_sums(n: usize, alpha: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(0.0);
    let mut acc = 0.0;
    for d in 1..=n {
        acc += (d as f64).powf(-alpha);
        p.push(acc);
    }
    p
}

/// Energy gap `δ_q` between `|v_q⟩` and `|v_0⟩`, for `q = 1..n−1`
/// (entry `q − 1`). Equals twice the coupling across the domain wall.
pub fn ising_domain_wall_profile(n: usize, alpha: f64) -> Result<Vec<f64>> {
    check(n, alpha)?;
    let p = prefix_sums(n, alpha);
    // Left block of m sites: S(1) = P(n−1), S(m+1) = S(m) − P(m) + P(n−m−1).
    let mut by_m = Vec::with_capacity(n - 1);
    let mut s = p[n - 1];
    by_m.push(2.0 * s);
    for m in 1..n - 1 {
        s += p[n - m - 1] - p[m];
        by_m.push(2.0 * s);
    }
    // q = n − m
    by_m.reverse();
    Ok(by_m)
}

fn check(n: usize, alpha: f64) -> Result<()> {
    if n < 2 {
        return arg(format!("the Ising seminorm needs n >= 2, got {n}"));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return arg(format!("alpha must be finite and >= 0, got {alpha}"));
    }
    Ok(())
}

/// Maximum of `δ_q` over `q` and the maximizing `q`; near-ties (relative
/// 1e-12) go to the `q` closest to `⌊n/2⌋`.
pub fn ising_seminorm_exact(n: usize, alpha: f64) -> Result<(f64, usize)> {
    let profile = ising_domain_wall_profile(n, alpha)?;
    let best = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = n / 2;
    let q = (1..n)
        .filter(|&q| profile[q - 1] >= best * (1.0 - 1e-12))
        .min_by_key(|&q| q.abs_diff(half))
        .expect("profile is nonempty");
    Ok((best, q))
}

/// `∫_1^{n−q} dx ∫_{n−q+1}^{n} dy (y − x)^{−α}` in closed form (α ≠ 1, 2).
pub fn ising_boxed_integral_closed_form(n: usize, q: usize, alpha: f64) -> f64 {
    let (nf, qf) = (n as f64, q as f64);
    let e = 2.0 - alpha;
    ((nf - 1.0).powf(e) - (nf - qf).powf(e) - qf.powf(e) + 1.0) / (e * (1.0 - alpha))
}

/// Same integral by adaptive Simpson quadrature over x with the inner
/// integral done analytically.
pub fn ising_boxed_integral_quadrature(n: usize, q: usize, alpha: f64, tol: f64) -> f64 {
    let nf = n as f64;
    let a = (n - q) as f64;
    let inner = move |x: f64| -> f64 {
        let hi = nf - x;
        let lo = a + 1.0 - x;
        if (alpha - 1.0).abs() < 1e-14 {
            hi.ln() - lo.ln()
        } else {
            (hi.powf(1.0 - alpha) - lo.powf(1.0 - alpha)) / (1.0 - alpha)
        }
    };
    adaptive_simpson(&inner, 1.0, a, tol)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Large-n form of the seminorm, evaluated at the domain wall `q = ⌊n/2⌋`.
///
/// * α < 1: `2(1 − 2^{α−1}) / ((2−α)(1−α)) · n^{2−α}`
/// * α = 1: `2 n ln 2`
/// * 1 < α < 2: `2(1 + I)` with the boxed integral `I` by quadrature
/// * α = 2: `2(1 + ln(q(n−q)/(n−1)))`
/// * α > 2: `2(1 + 1/((2−α)(1−α)))`
pub fn ising_seminorm_asymptotic(n: usize, alpha: f64) -> Result<f64> {
    check(n, alpha)?;
    let nf = n as f64;
    let q = n / 2;
    Ok(if alpha < 1.0 && (1.0 - alpha).abs() > 1e-12 {
        2.0 * (1.0 - 2f64.powf(alpha - 1.0)) / ((2.0 - alpha) * (1.0 - alpha))
            * nf.powf(2.0 - alpha)
    } else if (alpha - 1.0).abs() <= 1e-12 {
        2.0 * nf * std::f64::consts::LN_2
    } else if alpha < 2.0 && (2.0 - alpha).abs() > 1e-12 {
        2.0 * (1.0 + ising_boxed_integral_quadrature(n, q, alpha, 1e-10))
    } else if (alpha - 2.0).abs() <= 1e-12 {
        let qf = q as f64;
        2.0 * (1.0 + (qf * (nf - qf) / (nf - 1.0)).ln())
    } else {
        2.0 * (1.0 + 1.0 / ((2.0 - alpha) * (1.0 - alpha)))
    })
}

/// Timescales of the probe `|v_0⟩ + |v_⌊n/2⌋⟩` under uncorrelated p-body
/// dephasing. Closed form, no basis is built.
pub fn ising_max_variance_timescales(
    n: usize,
    alpha: f64,
    p: usize,
    c: &Couplings,
) -> Result<TimescaleReport> {
    if p == 0 || p > n {
        return arg(format!("need 1 <= p <= n, got p = {p}, n = {n}"));
    }
    let profile = ising_domain_wall_profile(n, alpha)?;
    let h = n / 2;
    let spread = profile[h - 1];
    // L_ν differs between the branches iff the tuple has an odd number of
    // sites among the h flipped ones; each such operator has ΔL² = 1.
    let (ni, pi, hi) = (n as i64, p as i64, h as i64);
    let mut s = 0.0;
    let mut j = 1;
    while j <= pi {
        s += choose(hi, j) * choose(ni - hi, pi - j);
        j += 2;
    }
    TimescaleReport::from_variances(spread * spread / 4.0, s, c)
}

/// Energy variance of the product state `⊗(cos φ|+⟩ + sin φ|−⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingProductVariance {
    pub variance: f64,
    /// `Σ_{i<j} |i−j|^{−2α}`.
    pub pair_sum: f64,
    /// `Σ_i Σ_{j<l; j,l≠i} |i−j|^{−α}|i−l|^{−α}`.
    pub triple_sum: f64,
    /// `sin²(4φ)`, which controls the leading large-n term.
    pub leading_coefficient: f64,
    /// True at `φ = π/8`, where the leading coefficient peaks.
    pub is_maximizer: bool,
    /// True at `φ = π/4`, where the triple-sum term vanishes.
    pub singular: bool,
}

/// `ΔH² = (1 − c⁴) Σ_pairs + 2(c² − c⁴) Σ_triples` with `c = cos 2φ`.
pub fn ising_product_variance(n: usize, alpha: f64, phi: f64) -> Result<IsingProductVariance> {
    check(n, alpha)?;
    if !(phi > 0.0 && phi < std::f64::consts::FRAC_PI_2) {
        return arg(format!("phi must lie in (0, π/2), got {phi}"));
    }
    let p1 = prefix_sums(n, alpha);
    let p2 = prefix_sums(n, 2.0 * alpha);
    let pair_sum: f64 = (1..n)
        .map(|d| (n - d) as f64 * (d as f64).powf(-2.0 * alpha))
        .sum();
    let triple_sum: f64 = (1..=n)
        .map(|i| {
            let row = p1[i - 1] + p1[n - i];
            let sq = p2[i - 1] + p2[n - i];
            0.5 * (row * row - sq)
        })
        .sum();
    let c = (2.0 * phi).cos();
    let (c2, c4) = (c * c, c.powi(4));
    Ok(IsingProductVariance {
        variance: (1.0 - c4) * pair_sum + 2.0 * (c2 - c4) * triple_sum,
        pair_sum,
        triple_sum,
        leading_coefficient: (4.0 * phi).sin().powi(2),
        is_maximizer: (phi - std::f64::consts::FRAC_PI_8).abs() < 1e-12,
        singular: (phi - std::f64::consts::FRAC_PI_4).abs() < 1e-12,
    })
}
