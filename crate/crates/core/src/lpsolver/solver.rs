//! Discretized fixed-point maps `H_s`, `H_u` and their damped Newton solve.

use nalgebra::{DMatrix, DVector};

use super::grid::{GridSpec, TrajectoryGrid};
use super::quadrature::{
    backward_kernel, backward_weights, forward_kernel, forward_weights, sweep_backward,
    sweep_forward, StepWeights,
};
use super::{
    FiberKind, FiberRequest, FiberSolution, SolverOptions, DEFAULT_RADIUS_CAP, SIGMA_FRACTION,
};
use crate::error::{Error, Result};
use crate::flow::fit_decay_rate;
use crate::normalform::{NormalFormContext, SUBSPACE_TOL};
use crate::spectral::Component;

const COMPONENTS: [Component; 3] = [Component::Center, Component::Stable, Component::Unstable];
const EXTENSION_FACTOR: f64 = 1.25;
/// Smallest damping factor tried before falling back to a Picard step.
const DAMPING_FLOOR: f64 = 1.0 / 64.0;
/// Fraction of the tolerance the truncated tails may use.
const TAIL_SHARE: f64 = 0.1;

/// One component's sweep: `out = sweep(boundary, sign · R_l)`.
struct Plan {
    forward: bool,
    weights: Vec<StepWeights>,
    sign: f64,
    boundary: DVector<f64>,
}

/// `H` on a fixed grid, acting on stacked spectral coordinates
/// (node-major; each node holds `(c, s, u)` in the `V_l` bases).
struct Discretization<'a> {
    ctx: &'a NormalFormContext,
    kind: FiberKind,
    sigma: f64,
    nodes: Vec<f64>,
    n: usize,
    dims: [usize; 3],
    offs: [usize; 3],
    plans: [Plan; 3],
    v: [DMatrix<f64>; 3],
}

impl<'a> Discretization<'a> {
    fn new(
        ctx: &'a NormalFormContext,
        kind: FiberKind,
        sigma: f64,
        nodes: Vec<f64>,
        boundary: &DVector<f64>,
    ) -> Self {
        let split = ctx.split();
        let n = split.n();
        let dims = [split.dims.0, split.dims.1, split.dims.2];
        let offs = [0, dims[0], dims[0] + dims[1]];
        let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let b_s = split.b(Component::Stable);
        let b_u = split.b(Component::Unstable);
        let zero_c = DMatrix::zeros(dims[0], dims[0]);
        // boundary value in spectral coordinates, relative to the base point
        let shift = match kind {
            FiberKind::Stable => ctx.phi_s(),
            FiberKind::Unstable => ctx.phi_u(),
        };
        let comp = kind.boundary_component();
        let bcoords = split.w(comp) * (boundary - shift);
        let zeros = |k: usize| DVector::zeros(k);
        let plans = match kind {
            FiberKind::Stable => {
                let sf = sigma;
                [
                    Plan {
                        forward: false,
                        weights: backward_weights(&zero_c, sf, &steps),
                        sign: -1.0,
                        boundary: zeros(dims[0]),
                    },
                    Plan {
                        forward: true,
                        weights: forward_weights(&-b_s, sf, &steps),
                        sign: 1.0,
                        boundary: bcoords,
                    },
                    Plan {
                        forward: false,
                        weights: backward_weights(b_u, sf, &steps),
                        sign: -1.0,
                        boundary: zeros(dims[2]),
                    },
                ]
            }
            FiberKind::Unstable => {
                let sf = -sigma;
                [
                    Plan {
                        forward: true,
                        weights: forward_weights(&zero_c, sf, &steps),
                        sign: 1.0,
                        boundary: zeros(dims[0]),
                    },
                    Plan {
                        forward: true,
                        weights: forward_weights(&-b_s, sf, &steps),
                        sign: 1.0,
                        boundary: zeros(dims[1]),
                    },
                    Plan {
                        forward: false,
                        weights: backward_weights(b_u, sf, &steps),
                        sign: -1.0,
                        boundary: bcoords,
                    },
                ]
            }
        };
        let v = COMPONENTS.map(|c| split.v(c).clone());
        Self {
            ctx,
            kind,
            sigma,
            nodes,
            n,
            dims,
            offs,
            plans,
            v,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn node(&self, a: &DVector<f64>, j: usize) -> DVector<f64> {
        a.rows(j * self.n, self.n).into_owned()
    }

    fn rhs(&self, a: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        (0..self.len())
            .map(|j| self.ctx.r_coords(&self.node(a, j)))
            .collect()
    }

    /// `Φ(a) = base + sweeps(R(a))`, so that `H(a) = a - Φ(a)`.
    fn apply(&self, r: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.len() * self.n);
        for (l, plan) in self.plans.iter().enumerate() {
            let (off, k) = (self.offs[l], self.dims[l]);
            if k == 0 {
                continue;
            }
            let src: Vec<DVector<f64>> = r.iter().map(|v| v.rows(off, k) * plan.sign).collect();
            let vals = if plan.forward {
                sweep_forward(&plan.weights, &plan.boundary, &src)
            } else {
                sweep_backward(&plan.weights, &plan.boundary, &src)
            };
            for (j, val) in vals.iter().enumerate() {
                out.rows_mut(j * self.n + off, k).copy_from(val);
            }
        }
        out
    }

    /// The initial iterate `Φ(0)`: only the boundary value propagated by the
    /// linear flow.
    fn homogeneous(&self) -> DVector<f64> {
        let zero = vec![DVector::zeros(self.n); self.len()];
        self.apply(&zero)
    }

    fn kernel(&self) -> DMatrix<f64> {
        let size = self.len() * self.n;
        let mut full = DMatrix::zeros(size, size);
        for (l, plan) in self.plans.iter().enumerate() {
            let (off, k) = (self.offs[l], self.dims[l]);
            if k == 0 {
                continue;
            }
            let kc = if plan.forward {
                forward_kernel(&plan.weights, k)
            } else {
                backward_kernel(&plan.weights, k)
            };
            for i in 0..self.len() {
                for j in 0..self.len() {
                    let blk = kc.view((i * k, j * k), (k, k));
                    full.view_mut((i * self.n + off, j * self.n + off), (k, k))
                        .copy_from(&(blk * plan.sign));
                }
            }
        }
        full
    }

    /// `I - K · blockdiag(W G'(v_j) V)`.
    fn jacobian(&self, kernel: &DMatrix<f64>, a: &DVector<f64>) -> Result<DMatrix<f64>> {
        let size = self.len() * self.n;
        let mut jac = DMatrix::<f64>::identity(size, size);
        for j in 0..self.len() {
            let dr = self.ctx.dr_coords(&self.node(a, j))?;
            let cols = kernel.columns(j * self.n, self.n) * dr;
            let mut target = jac.columns_mut(j * self.n, self.n);
            target -= cols;
        }
        Ok(jac)
    }

    fn node_norm(&self, a: &DVector<f64>, j: usize) -> f64 {
        (0..3)
            .filter(|&l| self.dims[l] > 0)
            .map(|l| (&self.v[l] * a.rows(j * self.n + self.offs[l], self.dims[l])).norm())
            .sum()
    }

    fn weighted(&self, a: &DVector<f64>) -> f64 {
        (0..self.len())
            .map(|j| (self.sigma * self.nodes[j].abs()).exp() * self.node_norm(a, j))
            .fold(0.0, f64::max)
    }

    /// Weighted bound on the neglected integrals beyond the horizon.
    fn tail_budget(&self, r: &[DVector<f64>]) -> f64 {
        let split = self.ctx.split();
        let horizon = self.nodes.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let amplitude = |l: usize| {
            if self.dims[l] == 0 {
                return 0.0;
            }
            (0..self.len())
                .filter(|&j| self.nodes[j].abs() >= 0.75 * horizon)
                .map(|j| {
                    (self.sigma * self.nodes[j].abs()).exp()
                        * (&self.v[l] * r[j].rows(self.offs[l], self.dims[l])).norm()
                })
                .fold(0.0, f64::max)
        };
        let (l_h, kappa) = match self.kind {
            FiberKind::Stable => (2, split.kappa_u()),
            FiberKind::Unstable => (1, split.kappa_s()),
        };
        amplitude(0) / self.sigma + kappa * amplitude(l_h) / (split.omega + self.sigma)
    }

    fn to_trajectory(&self, a: &DVector<f64>) -> TrajectoryGrid {
        let comp = |l: usize| -> Vec<DVector<f64>> {
            (0..self.len())
                .map(|j| &self.v[l] * a.rows(j * self.n + self.offs[l], self.dims[l]))
                .collect()
        };
        TrajectoryGrid {
            direction: self.kind.direction(),
            nodes: self.nodes.clone(),
            sigma: self.sigma,
            x: comp(0),
            y: comp(1),
            z: comp(2),
        }
    }

    fn pack_trajectory(&self, traj: &TrajectoryGrid) -> Result<DVector<f64>> {
        if traj.len() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "trajectory nodes",
                expected: self.len(),
                found: traj.len(),
            });
        }
        let split = self.ctx.split();
        let mut a = DVector::zeros(self.len() * self.n);
        for j in 0..self.len() {
            for (l, vals) in [&traj.x, &traj.y, &traj.z].into_iter().enumerate() {
                let c = COMPONENTS[l];
                let dev = split.subspace_deviation(c, &vals[j]);
                if dev > SUBSPACE_TOL * (1.0 + vals[j].norm()) {
                    return Err(Error::NotInSubspace {
                        component: c.name(),
                        deviation: dev,
                    });
                }
                a.rows_mut(j * self.n + self.offs[l], self.dims[l])
                    .copy_from(&(split.w(c) * &vals[j]));
            }
        }
        Ok(a)
    }

    fn origin(&self) -> usize {
        match self.kind {
            FiberKind::Stable => 0,
            FiberKind::Unstable => self.len() - 1,
        }
    }

    /// `(x₀, recovered, u₀)` from `Φ(a)` at `t = 0`.
    fn initial_values(
        &self,
        phi: &DVector<f64>,
        boundary: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let j = self.origin();
        let part = |l: usize| &self.v[l] * phi.rows(j * self.n + self.offs[l], self.dims[l]);
        let x0 = self.ctx.xi() + part(0);
        let recovered = match self.kind {
            FiberKind::Stable => self.ctx.phi_u() + part(2),
            FiberKind::Unstable => self.ctx.phi_s() + part(1),
        };
        let u0 = self.ctx.u_star() + &x0 + &recovered + boundary;
        (x0, recovered, u0)
    }
}

/// Result of re-assembling `H` on a given trajectory.
#[derive(Debug, Clone)]
pub struct Assembly {
    /// Nodewise `H` (difference between the trajectory and its image).
    pub residual: TrajectoryGrid,
    pub weighted_norm: f64,
    pub tail_budget: f64,
}

fn assemble(
    ctx: &NormalFormContext,
    kind: FiberKind,
    traj: &TrajectoryGrid,
    boundary: &DVector<f64>,
) -> Result<Assembly> {
    if traj.direction != kind.direction() {
        return Err(Error::InvalidArgument(format!(
            "{} fibers need a {:?} grid",
            kind.name(),
            kind.direction()
        )));
    }
    let disc = Discretization::new(ctx, kind, traj.sigma, traj.nodes.clone(), boundary);
    let a = disc.pack_trajectory(traj)?;
    let r = disc.rhs(&a)?;
    let h = &a - disc.apply(&r);
    Ok(Assembly {
        residual: disc.to_trajectory(&h),
        weighted_norm: disc.weighted(&h),
        tail_budget: disc.tail_budget(&r),
    })
}

/// `H_s(traj, y₀)` on a forward grid.
pub fn assemble_hs(
    ctx: &NormalFormContext,
    traj: &TrajectoryGrid,
    y0: &DVector<f64>,
) -> Result<Assembly> {
    assemble(ctx, FiberKind::Stable, traj, y0)
}

/// `H_u(traj, z₀)` on a backward grid.
pub fn assemble_hu(
    ctx: &NormalFormContext,
    traj: &TrajectoryGrid,
    z0: &DVector<f64>,
) -> Result<Assembly> {
    assemble(ctx, FiberKind::Unstable, traj, z0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredValues {
    pub x0: DVector<f64>,
    /// `z₀` for stable fibers, `y₀` for unstable ones.
    pub recovered: DVector<f64>,
    pub u0: DVector<f64>,
    pub tail_budget: f64,
}

/// Evaluates the initial-value quadratures (`x₀ = ξ - ∫₀^∞ R_c`, and the
/// complementary component) along a trajectory.
pub fn recover_initial_values(
    ctx: &NormalFormContext,
    kind: FiberKind,
    traj: &TrajectoryGrid,
    boundary: &DVector<f64>,
) -> Result<RecoveredValues> {
    let disc = Discretization::new(ctx, kind, traj.sigma, traj.nodes.clone(), boundary);
    let a = disc.pack_trajectory(traj)?;
    let r = disc.rhs(&a)?;
    let phi = disc.apply(&r);
    let (x0, recovered, u0) = disc.initial_values(&phi, boundary);
    Ok(RecoveredValues {
        x0,
        recovered,
        u0,
        tail_budget: disc.tail_budget(&r),
    })
}

pub fn solve_stable_fiber(
    ctx: &NormalFormContext,
    req: &FiberRequest,
    opts: &SolverOptions,
) -> Result<FiberSolution> {
    if req.kind != FiberKind::Stable {
        return Err(Error::InvalidArgument(
            "request is not for a stable fiber".into(),
        ));
    }
    solve_impl(ctx, req, opts, None)
}

pub fn solve_unstable_fiber(
    ctx: &NormalFormContext,
    req: &FiberRequest,
    opts: &SolverOptions,
) -> Result<FiberSolution> {
    if req.kind != FiberKind::Unstable {
        return Err(Error::InvalidArgument(
            "request is not for an unstable fiber".into(),
        ));
    }
    solve_impl(ctx, req, opts, None)
}

pub fn solve_fiber(
    ctx: &NormalFormContext,
    req: &FiberRequest,
    opts: &SolverOptions,
) -> Result<FiberSolution> {
    solve_impl(ctx, req, opts, None)
}

/// Like [`solve_fiber`] but starting Newton from `guess`, which must live on
/// the grid the options select.
pub fn solve_fiber_from(
    ctx: &NormalFormContext,
    req: &FiberRequest,
    opts: &SolverOptions,
    guess: &TrajectoryGrid,
) -> Result<FiberSolution> {
    solve_impl(ctx, req, opts, Some(guess))
}

fn check_request(
    ctx: &NormalFormContext,
    req: &FiberRequest,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let split = ctx.split();
    let n = split.n();
    if req.kind == FiberKind::Unstable && split.dims.2 == 0 {
        return Err(Error::EmptyUnstable);
    }
    for (what, v) in [("boundary value", &req.boundary), ("base point", &req.xi)] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: v.len(),
            });
        }
    }
    let comp = req.kind.boundary_component();
    let dev = split.subspace_deviation(comp, &req.boundary);
    if dev > SUBSPACE_TOL * (1.0 + req.boundary.norm()) {
        return Err(Error::NotInSubspace {
            component: comp.name(),
            deviation: dev,
        });
    }
    if (&req.xi - ctx.xi()).amax() > 1e-14 * (1.0 + req.xi.amax()) {
        return Err(Error::InvalidArgument(
            "request base point differs from the normal-form context".into(),
        ));
    }
    let sigma = req.sigma.unwrap_or(SIGMA_FRACTION * split.omega);
    if !(sigma > 0.0 && sigma <= split.omega) {
        return Err(Error::InvalidArgument(format!(
            "sigma must lie in (0, omega] = (0, {:.6e}], got {sigma:.6e}",
            split.omega
        )));
    }
    if !(req.tol_residual > 0.0) || req.max_iters == 0 {
        return Err(Error::InvalidArgument(
            "tolerance and iteration cap must be positive".into(),
        ));
    }
    let radius = opts
        .radius
        .unwrap_or_else(|| DEFAULT_RADIUS_CAP.min(ctx.chart().rho_0()));
    let slack = 1.0 + 1e-12;
    if req.boundary.norm() > radius * slack || req.xi.norm() > radius * slack {
        return Err(Error::Precondition(format!(
            "|boundary| = {:.6e} and |xi| = {:.6e} must not exceed the solver radius {radius:.6e}",
            req.boundary.norm(),
            req.xi.norm()
        )));
    }
    Ok((sigma, radius))
}

struct NewtonOutcome {
    a: DVector<f64>,
    phi: DVector<f64>,
    r: Vec<DVector<f64>>,
    residual: f64,
    iterations: usize,
}

/// Right-hand sides, `Φ(a)` and `H(a) = a - Φ(a)`.
type Evaluation = (Vec<DVector<f64>>, DVector<f64>, DVector<f64>);

/// `H(a)` together with the pieces reused by the caller.
fn evaluate(disc: &Discretization, a: &DVector<f64>) -> Result<Evaluation> {
    let r = disc.rhs(a)?;
    let phi = disc.apply(&r);
    let h = a - &phi;
    Ok((r, phi, h))
}

fn newton(
    disc: &Discretization,
    start: DVector<f64>,
    tol: f64,
    max_iters: usize,
    radius: f64,
) -> Result<NewtonOutcome> {
    let kernel = disc.kernel();
    let mut a = start;
    let (mut r, mut phi, mut h) = evaluate(disc, &a)?;
    let mut res = disc.weighted(&h);
    for iter in 1..=max_iters {
        let norm = disc.weighted(&a);
        if norm > 2.0 * radius {
            return Err(Error::LeftBall {
                norm,
                radius: 2.0 * radius,
            });
        }
        if res <= tol {
            return Ok(NewtonOutcome {
                a,
                phi,
                r,
                residual: res,
                iterations: iter,
            });
        }
        if iter == max_iters {
            break;
        }
        let jac = disc.jacobian(&kernel, &a)?;
        let step = jac.lu().solve(&h);
        let mut accepted = false;
        if let Some(step) = step.filter(|s| disc.weighted(s) <= radius) {
            let mut lambda = 1.0;
            while lambda >= DAMPING_FLOOR {
                let trial = &a - &step * lambda;
                if let Ok((tr, tphi, th)) = evaluate(disc, &trial) {
                    let tres = disc.weighted(&th);
                    if tres < res {
                        (a, r, phi, h, res) = (trial, tr, tphi, th, tres);
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            // Picard: a ← Φ(a)
            a = phi.clone();
            (r, phi, h) = evaluate(disc, &a)?;
            res = disc.weighted(&h);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        residual: res,
    })
}

fn solve_impl(
    ctx: &NormalFormContext,
    req: &FiberRequest,
    opts: &SolverOptions,
    guess: Option<&TrajectoryGrid>,
) -> Result<FiberSolution> {
    let (sigma, radius) = check_request(ctx, req, opts)?;
    let mut grid = match opts.grid {
        Some(g) => g,
        None => GridSpec::with_intervals(sigma, opts.intervals)?,
    };
    grid.validate(sigma)?;
    let allowance = TAIL_SHARE * req.tol_residual;
    let mut extensions = 0;
    loop {
        let nodes = grid.nodes(req.kind.direction());
        let disc = Discretization::new(ctx, req.kind, sigma, nodes, &req.boundary);
        let start = match guess {
            Some(g) if extensions == 0 => disc.pack_trajectory(g)?,
            _ => disc.homogeneous(),
        };
        let out = newton(&disc, start, req.tol_residual, req.max_iters, radius)?;
        let budget = disc.tail_budget(&out.r);
        if budget >= allowance {
            if extensions < opts.max_extensions {
                grid = grid.extended(EXTENSION_FACTOR)?;
                extensions += 1;
                continue;
            }
            return Err(Error::TailBound { budget, allowance });
        }
        let (x0, recovered, u0) = disc.initial_values(&out.phi, &req.boundary);
        let trajectory = disc.to_trajectory(&out.a);
        let times: Vec<f64> = trajectory.nodes.iter().map(|t| t.abs()).collect();
        let devs: Vec<f64> = (0..disc.len()).map(|j| disc.node_norm(&out.a, j)).collect();
        let decay_rate_est = fit_decay_rate(&times, &devs, 1e-10, 1e-2);
        return Ok(FiberSolution {
            request: req.clone(),
            sigma,
            grid,
            trajectory,
            x0,
            recovered,
            u0,
            u_infty: ctx.u_infty().clone(),
            residual: out.residual,
            iterations: out.iterations,
            tail_budget: budget,
            extensions,
            decay_rate_est,
        });
    }
}
