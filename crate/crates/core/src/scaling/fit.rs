use serde::Serialize;

use crate::error::{arg, Result};

/// `(n, value)` samples with the OLS slope of `ln value` against `ln n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSeries {
    pub samples: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub fit_window: (f64, f64),
}

impl ScalingSeries {
    /// Fits every sample.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let (fitted_slope, slope_stderr) = fit_scaling_exponent(&samples)?;
        let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = samples
            .iter()
            .map(|s| s.0)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            samples,
            fitted_slope,
            slope_stderr,
            fit_window: (lo, hi),
        })
    }

    /// Keeps all samples but fits only those with `n` in `[lo, hi]`.
    pub fn with_window(samples: Vec<(f64, f64)>, lo: f64, hi: f64) -> Result<Self> {
        let inside: Vec<(f64, f64)> = samples
            .iter()
            .copied()
            .filter(|s| s.0 >= lo && s.0 <= hi)
            .collect();
        let (fitted_slope, slope_stderr) = fit_scaling_exponent(&inside)?;
        Ok(Self {
            samples,
            fitted_slope,
            slope_stderr,
            fit_window: (lo, hi),
        })
    }
}

/// Ordinary least squares on `(ln n, ln value)`; returns slope and its
/// standard error from the residual variance.
pub fn fit_scaling_exponent(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 5 {
        return arg(format!(
            "a scaling fit needs at least 5 samples, got {}",
            samples.len()
        ));
    }
    if let Some(bad) = samples
        .iter()
        .find(|s| !(s.0 > 0.0) || !(s.1 > 0.0) || !s.1.is_finite())
    {
        return arg(format!(
            "samples must be positive and finite, got ({}, {})",
            bad.0, bad.1
        ));
    }
    let m = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return arg("samples need distinct n");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (rss / (m - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}
