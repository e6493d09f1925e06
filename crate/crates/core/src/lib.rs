//! Dirichlet-to-Neumann spectra on model surfaces: forward oracles, the
//! symbol calculus behind their asymptotics, and inverse recovery of
//! boundary invariants from a merged spectrum.

pub mod bessel;
pub mod cli;
pub mod decoupler;
pub mod diag;
pub mod error;
pub mod fit;
pub mod forward;
pub mod io;
pub mod periodic;
pub mod sequences;
pub mod symbol;

pub use error::{Error, Result};
pub use periodic::PeriodicFunction;
pub use symbol::{
    boundary_symbol, factor_symbol, is_hermitian, symbol_product, HomogeneousComponent, JetFunction,
    Potential, SymbolExpansion,
};
pub use diag::{
    asymptotic_coefficients, diag_step, fio_conjugate, predict_eigenvalues, DiagonalCoefficients, DiskProblem,
};
pub use sequences::{build_model_sequence, decay_order, merge, ComponentModel, SpectralValue, SpectrumSequence};
pub use decoupler::{decouple, DecoupleOptions, DecoupleReport};
