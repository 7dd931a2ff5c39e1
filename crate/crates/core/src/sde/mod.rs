//! Pathwise solvers for the three example equations, their derivatives and
//! the absolute-continuity experiments built on them.

mod diffusion;
mod experiments;
mod flow;
mod jump;

pub use diffusion::{
    d0_closed_form, derivative_d0_of, derivative_diffusion_d0, solve_diffusion, stopping_time_s,
    DiffusionSDE, DiffusionTrajectory,
};
pub use experiments::{
    density_experiment, local_monotone_experiment, markov_bound, monotone_drift_experiment, p_grid,
    truncation_convergence_report, truncation_set, wronskian_experiment, Conditioning,
    DensityReport, Histogram, JumpCountClass, LocalMonotoneReport, LocalMonotoneRow,
    LocalMonotoneSpec, MonotoneDriftReport, PathRow, SdeModel, TruncationReport, TruncationRow,
    WronskianReport, HISTOGRAM_BINS, KDE_POINTS,
};
pub use flow::{Flow, FlowSegment, DEFAULT_STEPS_PER_HORIZON};
pub use jump::{
    derivative_additive, derivative_multiplicative, last_jump_weight, local_weight,
    monotone_weight, reachable_range, sde_finite_difference_check, solve_additive_jump,
    solve_flow_with_jumps, solve_multiplicative, wronskian_condition, AdditiveJumpSDE, JumpSde,
    JumpTrajectory, Monotonicity, MultiplicativeJumpSDE, SupBounds, WronskianCheck,
    VALIDATION_RADIUS,
};
