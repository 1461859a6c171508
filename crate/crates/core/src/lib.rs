//! Noisy-dynamics quantum metrology for diagonal spin-chain models: exact
//! dephasing evolution, spectral QFI and its bounds, Zeno/decoherence
//! timescales, scaling laws, and a dense master-equation oracle.

// `!(x >= 0.0)` is the validation idiom: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod binomial;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod qfi;
pub mod scaling;
pub mod verify;

pub use basis::{
    build_basis, build_diagonals, pair_rates, DiagonalOperatorSet, HamiltonianSpec, LindbladSpec,
    PairRates, SpinBasis,
};
pub use dynamics::{Couplings, Param, ProbeSpec, TwoLevelProbe};
pub use error::{Error, Result};
pub use linalg::{CMatrix, DensityMatrix, C64};
pub use qfi::{PairReport, QfiBounds, QfiReport};
pub use scaling::{ScalingSeries, TimescaleReport};
