//! The local derivative `D^{Λ,k}`, its duality, and the positivity criterion.

mod derivative;
mod duality;
mod process;
mod weight;

pub use derivative::{
    derivative_jn, derivative_jump_functional, derivative_m, derivative_m_alt,
    derivative_m_alt_with, derivative_smooth, finite_difference_check, jump_time_difference,
    leading_jumps, CompensatorTerms, FdCheck, PreparedFunctional, SmoothFunctional,
};
pub use duality::{duality_residual, duality_weight, product_duality_residual, DualityReport};
pub use process::{
    abs_continuity_indicator, l2_norm_sq, orthogonality_residual, DerivativeProcess, Orthogonality,
    Step, DEFAULT_CRITERION_TOL,
};
pub use weight::{TimeFunction, WeightK};

/// Sets of jump sizes selecting the derivative directions; `0` is the Brownian direction.
pub type LambdaSet = crate::levy::JumpSet;
