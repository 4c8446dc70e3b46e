//! The deviation nonlinearity `G` and the asymptotic normal form around a
//! nearby equilibrium `u_inf = u_star + ξ + φ(ξ)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::EquilibriumChart;
use crate::error::{Error, Result};
use crate::model::ProblemModel;
use crate::spectral::{Component, SpectralSplit};

/// Tolerance for the "lies in its spectral subspace" checks.
pub const SUBSPACE_TOL: f64 = 1e-10;

/// `G(v) = f(u_star + v) + A₀v`, the nonlinear part of the deviation equation.
pub fn eval_g(
    model: &ProblemModel,
    u_star: &DVector<f64>,
    a0: &DMatrix<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(model.eval_rhs(&(u_star + v))? + a0 * v)
}

/// `G₂(v, w) = -(A(u_star + v) - A(u_star)) w`.
pub fn eval_g2(
    model: &ProblemModel,
    u_star: &DVector<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
) -> DVector<f64> {
    -(model.a_matrix(&(u_star + v)) - model.a_matrix(u_star)) * w
}

/// `G₁(v) = (F(u*+v) - F(u*) - F'(u*)v) - (A(u*+v) - A(u*) - [A'(u*)v])u*`.
pub fn eval_g1(model: &ProblemModel, u_star: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let u = u_star + v;
    let df = model.source(&u) - model.source(u_star) - model.source_jacobian(u_star) * v;
    let da = model.a_matrix(&u) - model.a_matrix(u_star) - model.a_derivative(u_star, v);
    df - da * u_star
}

/// `G₁(v) + G₂(v, v)`; equal to [`eval_g`] up to rounding.
pub fn eval_g_split(model: &ProblemModel, u_star: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    eval_g1(model, u_star, v) + eval_g2(model, u_star, v, v)
}

/// Normal-form data attached to one base point `ξ`.
#[derive(Debug, Clone)]
pub struct NormalFormContext {
    model: ProblemModel,
    split: Arc<SpectralSplit>,
    chart: Arc<EquilibriumChart>,
    u_star: DVector<f64>,
    xi: DVector<f64>,
    phi_s: DVector<f64>,
    phi_u: DVector<f64>,
    u_infty: DVector<f64>,
    g_at_base: DVector<f64>,
    /// `[V_c V_s V_u]` and its inverse `[W_c; W_s; W_u]`.
    v_all: DMatrix<f64>,
    w_all: DMatrix<f64>,
}

impl NormalFormContext {
    pub fn new(chart: Arc<EquilibriumChart>, xi: &DVector<f64>) -> Result<Self> {
        let split = Arc::clone(chart.split());
        let model = chart.model().clone();
        let n = model.n();
        if xi.len() != n {
            return Err(Error::DimensionMismatch {
                what: "base point",
                expected: n,
                found: xi.len(),
            });
        }
        let dev = split.subspace_deviation(Component::Center, xi);
        if dev > SUBSPACE_TOL {
            return Err(Error::NotInSubspace {
                component: "center",
                deviation: dev,
            });
        }
        let u_star = chart.u_star().clone();
        let (phi_s, phi_u) = chart.phi(xi)?;
        let base = xi + &phi_s + &phi_u;
        let u_infty = &u_star + &base;
        let g_at_base = eval_g(&model, &u_star, &split.a0, &base)?;

        let (mc, ms, mu) = split.dims;
        let mut v_all = DMatrix::zeros(n, n);
        let mut w_all = DMatrix::zeros(n, n);
        let mut off = 0;
        for (c, k) in [
            (Component::Center, mc),
            (Component::Stable, ms),
            (Component::Unstable, mu),
        ] {
            v_all.columns_mut(off, k).copy_from(split.v(c));
            w_all.rows_mut(off, k).copy_from(split.w(c));
            off += k;
        }
        Ok(Self {
            model,
            split,
            chart,
            u_star,
            xi: xi.clone(),
            phi_s,
            phi_u,
            u_infty,
            g_at_base,
            v_all,
            w_all,
        })
    }

    pub fn model(&self) -> &ProblemModel {
        &self.model
    }

    pub fn split(&self) -> &Arc<SpectralSplit> {
        &self.split
    }

    pub fn chart(&self) -> &Arc<EquilibriumChart> {
        &self.chart
    }

    pub fn u_star(&self) -> &DVector<f64> {
        &self.u_star
    }

    pub fn xi(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn phi_s(&self) -> &DVector<f64> {
        &self.phi_s
    }

    pub fn phi_u(&self) -> &DVector<f64> {
        &self.phi_u
    }

    pub fn u_infty(&self) -> &DVector<f64> {
        &self.u_infty
    }

    pub fn g_at_base(&self) -> &DVector<f64> {
        &self.g_at_base
    }

    pub fn eval_g(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        eval_g(&self.model, &self.u_star, &self.split.a0, v)
    }

    fn check_component(&self, c: Component, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.model.n() {
            return Err(Error::DimensionMismatch {
                what: "normal-form component",
                expected: self.model.n(),
                found: v.len(),
            });
        }
        let dev = self.split.subspace_deviation(c, v);
        if dev > SUBSPACE_TOL {
            return Err(Error::NotInSubspace {
                component: c.name(),
                deviation: dev,
            });
        }
        Ok(())
    }

    /// `R_l = P_l(G(x + y + z + ξ + φ(ξ)) - G(ξ + φ(ξ)))` for `l = c, s, u`.
    pub fn eval_r(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        self.check_component(Component::Center, x)?;
        self.check_component(Component::Stable, y)?;
        self.check_component(Component::Unstable, z)?;
        let v = x + y + z + &self.xi + &self.phi_s + &self.phi_u;
        let d = self.eval_g(&v)? - &self.g_at_base;
        Ok((
            &self.split.p_c * &d,
            &self.split.p_s * &d,
            &self.split.p_u * &d,
        ))
    }

    /// `(P_c v - ξ, P_s v - φ_s(ξ), P_u v - φ_u(ξ))` with `v = u - u_star`.
    pub fn to_normal_coords(
        &self,
        u: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        if u.len() != self.model.n() {
            return Err(Error::DimensionMismatch {
                what: "state vector",
                expected: self.model.n(),
                found: u.len(),
            });
        }
        let v = u - &self.u_star;
        let distance = v.norm();
        if distance > self.model.rho_v() {
            return Err(Error::DomainViolation {
                distance,
                radius: self.model.rho_v(),
            });
        }
        Ok((
            &self.split.p_c * &v - &self.xi,
            &self.split.p_s * &v - &self.phi_s,
            &self.split.p_u * &v - &self.phi_u,
        ))
    }

    /// `u_star + x + y + z + ξ + φ_s(ξ) + φ_u(ξ)`.
    pub fn from_normal_coords(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_component(Component::Center, x)?;
        self.check_component(Component::Stable, y)?;
        self.check_component(Component::Unstable, z)?;
        Ok(&self.u_infty + x + y + z)
    }

    /// Deviation `v` from `u_star` of the point with spectral coordinates `a`.
    pub(crate) fn deviation_from_coords(&self, a: &DVector<f64>) -> DVector<f64> {
        &self.v_all * a + &self.xi + &self.phi_s + &self.phi_u
    }

    /// `W (G(v) - G_base)` for spectral coordinates `a` (stacked c, s, u).
    pub(crate) fn r_coords(&self, a: &DVector<f64>) -> Result<DVector<f64>> {
        let v = self.deviation_from_coords(a);
        Ok(&self.w_all * (self.eval_g(&v)? - &self.g_at_base))
    }

    /// `W G'(v) V` with `G'(v) = Df(u_star + v) + A₀`.
    pub(crate) fn dr_coords(&self, a: &DVector<f64>) -> Result<DMatrix<f64>> {
        let v = self.deviation_from_coords(a);
        let jac = self.model.eval_rhs_jacobian(&(&self.u_star + v))? + &self.split.a0;
        Ok(&self.w_all * jac * &self.v_all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::build_chart;
    use crate::model::get_problem;
    use crate::spectral::{default_eps_center, linearize, split_spectrum};

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn context(name: &str, xi: f64) -> NormalFormContext {
        let e = get_problem(name).unwrap();
        let a0 = linearize(&e.model, &e.u_star).unwrap();
        let split = Arc::new(split_spectrum(&a0, e.model.m(), default_eps_center(&a0)).unwrap());
        let chart = Arc::new(build_chart(&e.model, split, &e.u_star).unwrap());
        let mut x = DVector::zeros(e.model.n());
        x[0] = xi;
        NormalFormContext::new(chart, &x).unwrap()
    }

    #[test]
    fn g_vanishes_at_zero_and_matches_split_form() {
        let ctx = context("line-stable", 0.0);
        assert_eq!(ctx.eval_g(&DVector::zeros(2)).unwrap(), DVector::zeros(2));
        let g = ctx.eval_g(&dv(&[0.0, 0.2])).unwrap();
        assert!((&g - dv(&[0.04, 0.0])).amax() < 1e-15);
        let split = eval_g_split(ctx.model(), ctx.u_star(), &dv(&[0.0, 0.2]));
        assert!((g - split).amax() < 1e-15);
    }

    #[test]
    fn g_has_zero_derivative_at_origin() {
        let ctx = context("line-hyperbolic", 0.0);
        let h = 1e-4;
        for j in 0..3 {
            let mut e = DVector::zeros(3);
            e[j] = h;
            let d = (ctx.eval_g(&e).unwrap() - ctx.eval_g(&-&e).unwrap()) / (2.0 * h);
            assert!(d.amax() < 1e-6);
        }
    }

    #[test]
    fn r_examples() {
        let ctx = context("line-stable", 0.0);
        let z = DVector::zeros(2);
        let (rc, rs, ru) = ctx.eval_r(&z, &z, &z).unwrap();
        assert_eq!((rc.amax(), rs.amax(), ru.amax()), (0.0, 0.0, 0.0));
        let (rc, rs, _) = ctx.eval_r(&z, &dv(&[0.0, 0.2]), &z).unwrap();
        assert!((rc - dv(&[0.04, 0.0])).amax() < 1e-15);
        assert!(rs.amax() < 1e-15);
        assert!(matches!(
            ctx.eval_r(&dv(&[0.0, 0.1]), &z, &z),
            Err(Error::NotInSubspace { .. })
        ));

        let ctx = context("line-hyperbolic", 0.1);
        let z = DVector::zeros(3);
        let (rc, rs, ru) = ctx.eval_r(&z, &z, &z).unwrap();
        assert_eq!((rc.amax(), rs.amax(), ru.amax()), (0.0, 0.0, 0.0));

        // curved manifold: G(ξ + φ(ξ)) = A₀φ(ξ) is nonzero, R still vanishes exactly
        let ctx = context("parabola-stable", 0.2);
        assert!((ctx.g_at_base()[1] - 0.04).abs() < 1e-12);
        let z = DVector::zeros(2);
        let (rc, rs, _) = ctx.eval_r(&z, &z, &z).unwrap();
        assert_eq!((rc.amax(), rs.amax()), (0.0, 0.0));
    }

    #[test]
    fn coordinate_round_trips() {
        let ctx = context("line-stable", 0.1);
        let (x, y, z) = ctx.to_normal_coords(ctx.u_infty()).unwrap();
        assert_eq!((x.amax(), y.amax(), z.amax()), (0.0, 0.0, 0.0));
        let u = dv(&[0.15, 0.2]);
        let (x, y, z) = ctx.to_normal_coords(&u).unwrap();
        assert!((&x - dv(&[0.05, 0.0])).amax() < 1e-15);
        assert!((&y - dv(&[0.0, 0.2])).amax() < 1e-15);
        assert_eq!(z, DVector::zeros(2));
        let back = ctx.from_normal_coords(&x, &y, &z).unwrap();
        assert!((back - u).amax() < 1e-12);

        let ctx = context("parabola-stable", 0.3);
        let z = DVector::zeros(2);
        let u = ctx.from_normal_coords(&z, &dv(&[0.0, 0.05]), &z).unwrap();
        assert!((u - dv(&[0.3, 0.14])).amax() < 1e-12);
    }
}
