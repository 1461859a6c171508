//! Timescales, optimal interrogation, sensitivity bounds and scaling laws.

mod fit;
mod ising;
mod product;
mod timescales;

pub use fit::{fit_scaling_exponent, ScalingSeries};
pub use ising::{
    ising_boxed_integral_closed_form, ising_boxed_integral_quadrature, ising_domain_wall_profile,
    ising_max_variance_timescales, ising_product_variance, ising_seminorm_asymptotic,
    ising_seminorm_exact, IsingProductVariance,
};
pub use product::{product_state_point, ProductPoint, DEFAULT_INTERROGATION_CONSTANT};
pub use timescales::{
    collective_noise_tau_d, ghz_timescales, kappa, optimal_interrogation, population_timescales,
    probe_timescales, sensitivity_bound, TimescaleReport,
};
