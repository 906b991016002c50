//! Reference semantics of action theories.

pub mod brute;
pub mod eval;
pub mod fixture;
pub mod model;
pub mod solve;
pub mod trajectory;
pub mod transition;

pub use brute::{brute_force_plans, brute_force_set_plans, NamedPlan, SearchSpaceTooLarge};
pub use eval::{eval_expr, holds, EvalError, Timeline};
pub use fixture::{Fixture, FixtureError, FixtureStep};
pub use model::*;
pub use solve::{inertial_complete, solve_effects, solve_exhaustive, Assignment};
pub use trajectory::{check_trajectory, Report, Trajectory, Violation, ViolationKind};
pub use transition::{
    apply_effects, apply_transition, collect_initial, desired_effects, executable, joint_effects, InconsistentInitialState,
    TransitionError,
};
