//! Exact finite-blocklength checks: coding errors against arbitrary
//! (entangled) jammer states, their symmetrization over channel-use
//! permutations, and de Finetti reductions to tensor-power jammers.

mod definetti;
mod error_operator;
mod scheme;

pub use definetti::{
    definetti_bound_check, definetti_monte_carlo, definetti_state, definetti_state_with_budget, permutation_deviation, symmetrize_state,
    tensor_power_sup, theorem3_bound_check, DeFinettiCheck, Theorem3Report, BOUND_TOL, INVARIANCE_TOL,
};
pub use error_operator::{
    build_error_operator, build_error_operator_with_budget, coding_error, conjugated_error_operator, permutation_covariance_check,
    permuted_error_operator, symmetrize_scheme, worst_case_jammer, CovarianceCheck, ErrorOperator, CROSS_CHECK_TOL, MAX_COVARIANCE_N,
    MAX_SYMMETRIZE_N, SPECTRUM_TOL,
};
pub use scheme::{builtin_scheme, computational_scheme, dense_scheme, random_scheme, xbasis_scheme, CodingScheme};
