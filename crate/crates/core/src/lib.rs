//! Non-backtracking walks on `Z^d`, tori and the hypercube: exact path
//! counts, the Fourier-space transition matrix and its spectrum, Green's
//! functions, mixing times and Monte-Carlo CLT diagnostics.

pub mod error;
pub mod exact_count;
pub mod greens;
pub mod lattice;
pub mod sampler_clt;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use lattice::{
    hamming_step_transform, hypercube_step_transform, step_transform, unit_vector, Direction,
    FourierVector, StepSet, StepSetKind, StepSetSpec, TorusSpec,
};
pub use nalgebra;
pub use num_complex::Complex64;
pub use spectral::{
    bn_hat, bn_ratio, bn_vec, build_matrix, dominant_eigenvalues, eigenbasis, eigenvalue_bound,
    fdd_char_function, matrix_power_apply, EigenBasis, SpectralPair, TransitionMatrix,
};
pub use exact_count::{count_walks, count_walks_capped, CountField, Walk};
pub use greens::{greens_directed, greens_hat, GreensEvaluation};
pub use sampler_clt::{
    empirical_covariance, endpoint_char_function_exact, fdd_gaussian_check, sample_endpoints, sample_paths,
    CovarianceEstimate, CovarianceTarget, Ensemble, PathSample,
};
pub use torus::{
    bound_evaluators, mixing_time, torus_counts, torus_distribution_dp, torus_distribution_fourier, Family,
    LemmaBounds, MixingReport, TorusDistribution,
};
