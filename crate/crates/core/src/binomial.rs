//! Binomial coefficients.
//!
//! Exact 128-bit arithmetic up to `n = 120`, a running product in `f64` for
//! moderate lower index, and log-gamma beyond.

use statrs::function::gamma::ln_gamma;

/// Largest `n` evaluated in exact integer arithmetic.
pub const EXACT_LIMIT: u64 = 120;

/// Above this lower index the floating product gives way to log-gamma.
const PRODUCT_LIMIT: u64 = 1000;

/// Exact `C(n, k)`, `None` on overflow. `C(n, k) = 0` for `k > n`.
pub fn binom_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc = C(n, i) here, so acc * (n - i) is divisible by i + 1.
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

/// `C(n, k)` as a float.
pub fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= EXACT_LIMIT {
        if let Some(v) = binom_exact(n, k) {
            return v as f64;
        }
    }
    if k <= PRODUCT_LIMIT {
        let mut acc = 1.0f64;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        return acc;
    }
    ln_binom(n, k).exp()
}

/// `ln C(n, k)`; `-inf` when the coefficient vanishes.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `C(n, k)` for signed arguments, zero outside `0 <= k <= n`.
pub fn choose(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        0.0
    } else {
        binom(n as u64, k as u64)
    }
}

/// Exact signed-argument variant used by the counting formulas.
pub(crate) fn choose_exact(n: i64, k: i64) -> Option<u128> {
    if n < 0 || k < 0 || k > n {
        Some(0)
    } else {
        binom_exact(n as u64, k as u64)
    }
}
