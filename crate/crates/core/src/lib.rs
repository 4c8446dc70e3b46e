//! Stable and unstable foliations of normally hyperbolic manifolds of
//! equilibria for quasilinear systems `u' + A(u)u = F(u)`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod error;
pub mod flow;
mod linalg;
pub mod lpsolver;
pub mod model;
pub mod normalform;
pub mod spectral;

/// Library version, echoed in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use chart::{
    build_chart, build_chart_with, verify_chart, ChartReport, ChartRoute, EquilibriumChart,
};
pub use error::{Error, Result};
pub use flow::{
    estimate_decay_rate, fit_decay_rate, integrate, verify_fiber, verify_point, FlowResult,
    VerificationReport,
};
pub use linalg::max_principal_angle;
pub use lpsolver::{
    decompose_initial_value, fiber_tangent, foliate, solve_fiber, solve_stable_fiber,
    solve_unstable_fiber, tangent_angle, Decomposition, FiberKind, FiberRequest, FiberSolution,
    GridSpec, SolverOptions,
};
pub use model::{
    get_problem, get_problem_with_params, problem_names, ProblemModel, ProblemRegistryEntry,
};
pub use normalform::NormalFormContext;
pub use spectral::{
    check_normally_hyperbolic, default_eps_center, linearize, split_spectrum, Classification,
    Component, HyperbolicityReport, SpectralSplit,
};
