//! Spectra of branched Hamiltonians tied to the isochronous modified Emden
//! oscillator.
//!
//! The quantum side reduces to half-line Schrödinger problems with displaced
//! (isotonic) oscillator potentials; the classical side integrates the Emden
//! equation and its branched canonical form; an exact polynomial layer checks
//! the Chiellini integrability condition.

// NaN-rejecting guards are written as `!(x > 0.0)`; oracle constants keep
// the digits they were computed with.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod classical;
pub mod eigensolver;
pub mod error;
pub mod export;
pub mod model;
pub mod perturbation;
pub mod polyalgebra;
pub mod quadrature;
pub mod quantize;
pub mod reference;
pub mod specfun;

pub use classical::{
    detect_period, emden_to_canonical, hamiltonian, integrate_emden, integrate_hamiltonian, isochronicity_condition_g,
    ClassicalState, EmdenParams, ForceLaw, HamiltonianPoint, HamiltonianState, IsochronousG,
};
pub use eigensolver::{
    default_domain, eigenfunction, solve_levels, EigenfunctionTable, Grid, GridMeta, Method, Spectrum,
};
pub use error::{
    ClassicalError, ModelError, PerturbationError, PolyError, QuadratureError, QuantizeError, SolverError, SpecFunError,
};
pub use model::{
    effective_potential, hermite_truncation_scan, isotonic_eigenfunction, isotonic_exact_energy, Branch, EnergyMap,
    ModelParams, TruncationScan,
};
pub use perturbation::{
    corrected_energies, first_moment_closed, first_moment_quadrature, smallness_bound, PerturbationResult,
};
pub use polyalgebra::{chiellini_check, isochronous_g, uniqueness_scan, ChielliniReport, Polynomial, UniquenessReport};
pub use quantize::{quantize_pcf, QuantizationRoot};
pub use reference::{reference_table, ReferenceTable};

/// Re-exported so downstream crates can build exact coefficients.
pub use num_rational::BigRational;
