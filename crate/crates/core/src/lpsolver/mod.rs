//! Lyapunov–Perron solver for the fibers of the stable and unstable
//! foliations.

mod family;
pub mod grid;
pub mod quadrature;
mod solver;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spectral::Component;

pub use family::{decompose_initial_value, fiber_tangent, foliate, tangent_angle, Decomposition};
pub use grid::{Direction, GridSpec, TrajectoryGrid};
pub use solver::{
    assemble_hs, assemble_hu, recover_initial_values, solve_fiber, solve_fiber_from,
    solve_stable_fiber, solve_unstable_fiber, Assembly, RecoveredValues,
};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 40;
/// Upper bound for the default solver radius `r = min(0.2, ρ₀)`.
pub const DEFAULT_RADIUS_CAP: f64 = 0.2;
/// `σ = SIGMA_FRACTION · ω` unless set.
pub const SIGMA_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiberKind {
    Stable,
    Unstable,
}

impl FiberKind {
    pub fn name(self) -> &'static str {
        match self {
            FiberKind::Stable => "stable",
            FiberKind::Unstable => "unstable",
        }
    }

    /// The spectral component carrying the boundary value.
    pub fn boundary_component(self) -> Component {
        match self {
            FiberKind::Stable => Component::Stable,
            FiberKind::Unstable => Component::Unstable,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            FiberKind::Stable => Direction::Forward,
            FiberKind::Unstable => Direction::Backward,
        }
    }
}

impl std::str::FromStr for FiberKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(FiberKind::Stable),
            "unstable" => Ok(FiberKind::Unstable),
            other => Err(Error::InvalidArgument(format!(
                "fiber kind must be `stable` or `unstable`, got `{other}`"
            ))),
        }
    }
}

/// One fiber point to compute: `λ^s(y₀, ξ)` or `λ^u(z₀, ξ)`.
///
/// `boundary` and `xi` are full state-space vectors lying in the stable
/// (unstable) and center subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberRequest {
    pub kind: FiberKind,
    pub boundary: DVector<f64>,
    pub xi: DVector<f64>,
    /// Exponential weight; defaults to `0.9 ω`.
    pub sigma: Option<f64>,
    pub tol_residual: f64,
    pub max_iters: usize,
}

impl FiberRequest {
    pub fn new(kind: FiberKind, boundary: DVector<f64>, xi: DVector<f64>) -> Self {
        Self {
            kind,
            boundary,
            xi,
            sigma: None,
            tol_residual: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn stable(y0: DVector<f64>, xi: DVector<f64>) -> Self {
        Self::new(FiberKind::Stable, y0, xi)
    }

    pub fn unstable(z0: DVector<f64>, xi: DVector<f64>) -> Self {
        Self::new(FiberKind::Unstable, z0, xi)
    }
}

/// Discretization and safeguard settings shared by a batch of requests.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Number of grid intervals `N` for the default grid.
    pub intervals: usize,
    /// Explicit grid; overrides `intervals` and the default horizon.
    pub grid: Option<GridSpec>,
    /// Solver radius `r`; defaults to `min(0.2, ρ₀)`.
    pub radius: Option<f64>,
    /// How many times the horizon may be stretched by 1.25 when the tail
    /// budget is too large.
    pub max_extensions: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            intervals: grid::DEFAULT_INTERVALS,
            grid: None,
            radius: None,
            max_extensions: 4,
        }
    }
}

/// A converged fiber computation.
#[derive(Debug, Clone)]
pub struct FiberSolution {
    pub request: FiberRequest,
    pub sigma: f64,
    pub grid: GridSpec,
    pub trajectory: TrajectoryGrid,
    /// Center part `x₀ = P_c(u₀ - u_star)`.
    pub x0: DVector<f64>,
    /// The recovered complementary component: `z₀` for stable fibers, `y₀`
    /// for unstable ones.
    pub recovered: DVector<f64>,
    /// The fiber point.
    pub u0: DVector<f64>,
    pub u_infty: DVector<f64>,
    /// Weighted norm of the discretized fixed-point map residual.
    pub residual: f64,
    /// Iterates examined, counting the initial one.
    pub iterations: usize,
    pub tail_budget: f64,
    pub extensions: usize,
    /// Slope fit of `ln |(x, y, z)(t)|` against `|t|`.
    pub decay_rate_est: Option<f64>,
}
