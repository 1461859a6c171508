//! Independent brute-force checks: dense master-equation integration,
//! Hermitian eigendecomposition, finite-difference derivatives and the
//! product-state spectrum fit.

mod dd;
mod eigen;
mod finite_diff;
mod integrator;
mod lstsq;
mod spectrum;

pub use eigen::{hermitian_eigendecomposition, reconstruction_residuals, Eigen};
pub use finite_diff::{default_step, finite_difference_drho, richardson_drho};
pub use integrator::{
    integrate_adaptive, integrate_master_equation, Integrator, MasterEquationProblem,
    ORACLE_SITE_LIMIT,
};
pub use lstsq::lstsq;
pub use spectrum::{product_state_spectrum_check, SpectrumCheck, KAPPA_SIGNIFICANCE};
