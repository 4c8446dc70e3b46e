//! Operations built on repeated fiber solves: tangents, decomposition of
//! initial values and whole families of fibers.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{solve_fiber, FiberKind, FiberRequest, FiberSolution, SolverOptions};
use crate::chart::EquilibriumChart;
use crate::error::{Error, Result};
use crate::linalg::{self, max_principal_angle};
use crate::normalform::NormalFormContext;
use crate::spectral::{
    check_normally_hyperbolic, default_eps_center, linearize, Classification, Component,
    SpectralSplit,
};

/// Central-difference step for tangents.
pub const TANGENT_STEP: f64 = 1e-5;
/// Forward-difference step for the decomposition Jacobian.
pub const DECOMPOSE_STEP: f64 = 1e-6;
pub const DECOMPOSE_TOL: f64 = 1e-8;
pub const DECOMPOSE_MAX_ITERS: usize = 25;

fn template(
    kind: FiberKind,
    boundary: DVector<f64>,
    xi: DVector<f64>,
    like: &FiberRequest,
) -> FiberRequest {
    FiberRequest {
        kind,
        boundary,
        xi,
        sigma: like.sigma,
        tol_residual: like.tol_residual,
        max_iters: like.max_iters,
    }
}

/// `D λ(·, ξ)(0)` by central differences over the orthonormal basis of the
/// boundary subspace; returns an n×k matrix.
pub fn fiber_tangent(
    ctx: &NormalFormContext,
    kind: FiberKind,
    like: &FiberRequest,
    opts: &SolverOptions,
) -> Result<DMatrix<f64>> {
    let split = ctx.split();
    let comp = kind.boundary_component();
    let basis = split.basis(comp);
    let n = split.n();
    let mut tangent = DMatrix::zeros(n, basis.ncols());
    for i in 0..basis.ncols() {
        let e = basis.column(i).into_owned();
        let solve = |s: f64| -> Result<DVector<f64>> {
            let req = template(kind, &e * s, ctx.xi().clone(), like);
            Ok(solve_fiber(ctx, &req, opts)?.u0)
        };
        let col = (solve(TANGENT_STEP)? - solve(-TANGENT_STEP)?) / (2.0 * TANGENT_STEP);
        tangent.set_column(i, &col);
    }
    Ok(tangent)
}

/// Largest principal angle between `tangent` and the stable (unstable)
/// invariant subspace of the linearization at `u_inf`.
pub fn tangent_angle(
    ctx: &NormalFormContext,
    kind: FiberKind,
    tangent: &DMatrix<f64>,
) -> Result<f64> {
    let a0 = linearize(ctx.model(), ctx.u_infty())?;
    let split = SpectralSplit::decompose(&a0, default_eps_center(&a0))?;
    Ok(max_principal_angle(
        tangent,
        split.basis(kind.boundary_component()),
    ))
}

/// `u₀ = λ^s(y₀, ξ)` solved for `(y₀, ξ)`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub y0: DVector<f64>,
    pub xi: DVector<f64>,
    /// Coordinates of `y₀` and `ξ` in the orthonormal subspace bases.
    pub y0_coords: DVector<f64>,
    pub xi_coords: DVector<f64>,
    /// Normal-form value `y(0) = y₀ - φ_s(ξ)`.
    pub normal_form_y: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub solution: FiberSolution,
}

/// Finds the stable fiber through `u0` (normally stable equilibria only).
pub fn decompose_initial_value(
    chart: &Arc<EquilibriumChart>,
    u0: &DVector<f64>,
    like: &FiberRequest,
    opts: &SolverOptions,
) -> Result<Decomposition> {
    let split = Arc::clone(chart.split());
    let model = chart.model();
    let report = check_normally_hyperbolic(&split, model.m());
    if report.classification != Classification::NormallyStable {
        return Err(Error::Precondition(format!(
            "decomposition needs a normally stable equilibrium, found {}",
            report.classification.label()
        )));
    }
    let n = split.n();
    if u0.len() != n {
        return Err(Error::DimensionMismatch {
            what: "initial value",
            expected: n,
            found: u0.len(),
        });
    }
    let bs = split.basis(Component::Stable).clone();
    let bc = split.basis(Component::Center).clone();
    let (ks, kc) = (bs.ncols(), bc.ncols());
    let d = u0 - chart.u_star();
    let mut p = DVector::zeros(ks + kc);
    p.rows_mut(0, ks)
        .copy_from(&(bs.transpose() * &split.p_s * &d));
    p.rows_mut(ks, kc)
        .copy_from(&(bc.transpose() * &split.p_c * &d));

    // The grid of the first solve is reused so that λ^s is one smooth
    // discrete map throughout the iteration.
    let mut opts = opts.clone();
    let eval = |p: &DVector<f64>, opts: &SolverOptions| -> Result<(DVector<f64>, FiberSolution)> {
        let y0 = &bs * p.rows(0, ks);
        let xi = &bc * p.rows(ks, kc);
        let ctx = NormalFormContext::new(Arc::clone(chart), &xi)?;
        let sol = solve_fiber(&ctx, &template(FiberKind::Stable, y0, xi, like), opts)?;
        Ok((&sol.u0 - u0, sol))
    };
    let (mut f, mut sol) = eval(&p, &opts)?;
    opts.grid = Some(sol.grid);
    for iter in 1..=DECOMPOSE_MAX_ITERS {
        let residual = f.norm();
        if residual <= DECOMPOSE_TOL {
            let xi = &bc * p.rows(ks, kc);
            let y0 = &bs * p.rows(0, ks);
            let ctx = NormalFormContext::new(Arc::clone(chart), &xi)?;
            return Ok(Decomposition {
                normal_form_y: &y0 - ctx.phi_s(),
                y0,
                xi,
                y0_coords: p.rows(0, ks).into_owned(),
                xi_coords: p.rows(ks, kc).into_owned(),
                residual,
                iterations: iter,
                solution: sol,
            });
        }
        let mut jac = DMatrix::zeros(n, ks + kc);
        for i in 0..ks + kc {
            let mut q = p.clone();
            q[i] += DECOMPOSE_STEP;
            let (fq, _) = eval(&q, &opts)?;
            jac.set_column(i, &((fq - &f) / DECOMPOSE_STEP));
        }
        p -= linalg::solve(&jac, &f, "decomposition Jacobian")?;
        (f, sol) = eval(&p, &opts)?;
    }
    Err(Error::NewtonFailed {
        what: "initial-value decomposition",
        iterations: DECOMPOSE_MAX_ITERS,
        residual: f.norm(),
    })
}

/// Solves one fiber per `(boundary, ξ)` pair in parallel; results keep the
/// input order and failures are returned in place.
pub fn foliate(
    chart: &Arc<EquilibriumChart>,
    kind: FiberKind,
    points: &[(DVector<f64>, DVector<f64>)],
    like: &FiberRequest,
    opts: &SolverOptions,
) -> Vec<Result<FiberSolution>> {
    points
        .par_iter()
        .map(|(boundary, xi)| {
            let ctx = NormalFormContext::new(Arc::clone(chart), xi)?;
            solve_fiber(
                &ctx,
                &template(kind, boundary.clone(), xi.clone(), like),
                opts,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::build_chart;
    use crate::model::get_problem;

    fn chart(name: &str) -> Arc<EquilibriumChart> {
        let e = get_problem(name).unwrap();
        let a0 = linearize(&e.model, &e.u_star).unwrap();
        let split = SpectralSplit::decompose(&a0, default_eps_center(&a0)).unwrap();
        Arc::new(build_chart(&e.model, Arc::new(split), &e.u_star).unwrap())
    }

    #[test]
    fn linear_tangent_is_the_stable_basis() {
        let c = chart("linear-diag");
        let ctx = NormalFormContext::new(
            Arc::clone(&c),
            &DVector::from_column_slice(&[0.1, 0.0, 0.0]),
        )
        .unwrap();
        let like = FiberRequest::stable(DVector::zeros(3), ctx.xi().clone());
        let t = fiber_tangent(&ctx, FiberKind::Stable, &like, &SolverOptions::default()).unwrap();
        assert!((t - c.split().basis(Component::Stable)).amax() <= 1e-9);
    }

    #[test]
    fn decomposing_a_base_point_gives_zero_boundary() {
        let c = chart("line-stable");
        let u0 = c.point(&DVector::from_column_slice(&[0.03, 0.0])).unwrap();
        let like = FiberRequest::stable(DVector::zeros(2), DVector::zeros(2));
        let d = decompose_initial_value(&c, &u0, &like, &SolverOptions::default()).unwrap();
        assert!(d.y0.amax() <= 1e-10);
        assert!((d.xi[0] - 0.03).abs() <= 1e-10);
        assert_eq!(d.iterations, 1);
    }
}
