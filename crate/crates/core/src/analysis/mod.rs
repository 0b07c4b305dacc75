//! Closed-form constants, lower and upper bounds, hypothesis checks and
//! certificates.

mod bounds;
mod certify;
mod comparison;
mod constants;
mod proof;

pub use bounds::{
    concavity_check, lower_bound_constant_width, lower_bound_linear, lower_bound_variable_width,
    lyapunov_bound, lyapunov_report, BoundKind, BoundReport, BoundTarget, HypothesisResult,
    DEFAULT_CHECK_TOL,
};
pub(crate) use bounds::check_weight;
pub use certify::{
    certify_odd, certify_odd_with_upper, odd_mode_threshold, test_function_upper_bound, CaseLabel,
    Certificate, Threshold, NONNEGATIVE_TOL,
};
pub(crate) use certify::{radial_mass, radial_stiffness};
pub use comparison::{comparison_row, pi_comparison_table, uniform_x_grid, ComparisonRow};
pub use constants::{a_p, b_p, c_p, pi_p, pi_p_quadrature};
pub use proof::{proof_constants, proof_constants_at, ProofConstants};
