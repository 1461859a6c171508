use crate::error::{arg, Result};
use crate::linalg::{CMatrix, DensityMatrix};

/// Default central-difference step for a parameter value `x`.
pub fn default_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// `(ρ(x+h) − ρ(x−h)) / 2h`, re-Hermitized.
pub fn finite_difference_drho<F>(evolver: F, x: f64, h: f64) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    if !(h > 0.0) {
        return arg(format!("finite-difference step must be positive, got {h}"));
    }
    let plus = evolver(x + h)?;
    let minus = evolver(x - h)?;
    let mut d = plus.matrix().sub(minus.matrix()).scale(0.5 / h);
    d.hermitize();
    Ok(d)
}

/// Richardson-extrapolated central difference from steps `h` and `h/2`;
/// also returns the entrywise gap between the two central differences.
pub fn richardson_drho<F>(evolver: F, x: f64, h: f64) -> Result<(CMatrix, f64)>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    let coarse = finite_difference_drho(&evolver, x, h)?;
    let fine = finite_difference_drho(&evolver, x, 0.5 * h)?;
    let gap = coarse.max_abs_diff(&fine);
    Ok((fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0)), gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn qubit(x: f64) -> Result<DensityMatrix> {
        let psi = [C64::new(x.cos(), 0.0), C64::from_polar(x.sin(), 0.3 * x)];
        DensityMatrix::pure(&psi)
    }

    #[test]
    fn constant_evolution_gives_zero() {
        let d = finite_difference_drho(|_| qubit(0.4), 1.0, 1e-3).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn second_order_convergence() {
        let x = 0.7;
        let exact = {
            // derivative via a tiny Richardson step as reference
            richardson_drho(qubit, x, 1e-3).unwrap().0
        };
        let e1 = finite_difference_drho(qubit, x, 0.02)
            .unwrap()
            .max_abs_diff(&exact);
        let e2 = finite_difference_drho(qubit, x, 0.01)
            .unwrap()
            .max_abs_diff(&exact);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }
}
