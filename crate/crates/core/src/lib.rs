//! Multi-sensor compressed sensing toolkit.
//!
//! The crate models parallel acquisition: `C` sensors observe the same signal
//! `f = U x` through profile matrices `H_c`, each sensor taking subgaussian
//! random measurements. It provides
//!
//! * the unitary sparsity bases ([`transforms`]),
//! * sensor profile families and their joint near-isometry constants
//!   ([`profiles`]),
//! * the coherence-type constants that govern measurement counts
//!   ([`constants`]),
//! * assembly of the stacked measurement matrix for distinct, identical and
//!   block-diagonal sampling ([`measurement`]),
//! * empirical asymmetric restricted isometry constants ([`aric`]),
//! * an l1 decoder for the noise-constrained problem ([`recovery`]),
//! * the phase-transition experiment driver ([`experiments`]).

pub mod aric;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod profiles;
pub mod recovery;
pub mod rng;
pub mod transforms;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub use aric::{aric_exhaustive, aric_sampled, recovery_sufficient, AricEstimate, AricMethod};
pub use constants::{
    coherence, gamma_bar_block, gamma_distinct, gamma_identical, measurement_condition_report,
    mu_tilde, xi_distinct, xi_identical, ConditionMode, ConstantsReport,
};
pub use error::{Error, Result};
pub use experiments::{
    random_sparse_signal, run_experiment, run_phase_grid, transition_curve, ExperimentConfig,
    ExperimentSampling, PhaseGrid,
};
pub use measurement::{
    assemble_block_diagonal, assemble_distinct, assemble_distinct_varied, assemble_identical,
    subgaussian_matrix, EntryDist, MeasurementEnsemble, SamplingMode,
};
pub use profiles::{ProfileFamily, ProfileSet, ProfileStructure};
pub use recovery::{relative_error, sigma_s, solve_bpdn, success, RecoveryResult, SolverConfig};
pub use transforms::{BasisKind, UnitaryBasis};

/// Complex scalar used throughout.
pub type C64 = Complex64;
