//! Exact expected determinants and permanents of random Gram matrices.
//!
//! A random Gram matrix `G_n = A^T A` is built from `n` independent
//! `t`-dimensional columns drawn from a fixed law. Its expected
//! determinant and permanent depend on that law only through the
//! second-moment matrix `M`, via the power traces `t_k = trace(M^k)`.
//! This crate computes those expectations exactly along three
//! independent routes, provides brute-force oracles to check them, and
//! runs Monte Carlo experiments against the sampled characteristic and
//! permanental polynomial coefficients.

pub mod error;
pub mod expected;
pub mod matrix;
pub mod models;
pub mod monte_carlo;
pub mod oracles;
pub mod scalar;
pub mod series;
pub mod traces;

pub use error::{Error, Result};
pub use expected::{
    all_paths, char_coeffs, egf_expand_det, egf_expand_perm, expected_coefficient, expected_det_from_char,
    expected_det_recursion, expected_det_sequence_from_char, expected_perm_from_char, expected_perm_recursion,
    weighted_cycle_sum, CharCoeffs, ExpectedSequence, Kind, PathKind,
};
pub use matrix::ExactMatrix;
pub use models::{
    moment_matrix_compound, moment_matrix_from_atoms, moment_matrix_multinomial, sample_count_vector, Atom,
    CompoundCountModel, CountModel, DiscreteVectorDistribution, Model, MomentMatrix, MultinomialCountModel,
    SeededRng,
};
pub use monte_carlo::{sample_gram, simulate, stddev_trend, SimulationConfig, SimulationReport};
pub use oracles::OracleLimits;
pub use scalar::ExactScalar;
pub use series::TruncatedSeries;
pub use traces::{traces_by_power, traces_from_char_coeffs, TraceSequence};
