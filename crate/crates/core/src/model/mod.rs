//! Quasilinear evolution problems `u' + A(u)u = F(u)` and the built-in registry.

mod registry;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use registry::{
    get_problem, get_problem_with_params, problem_names, FiberOracle, ProblemRegistryEntry,
};

/// `u ↦ matrix`, used for `A(u)` and `F'(u)`.
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// `u ↦ vector`, used for `F(u)` and the equilibrium parametrization.
pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
/// `(u, w) ↦ [A'(u)w]`.
pub type DirectionalFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Default radius of the validity ball around the reference equilibrium.
pub const DEFAULT_RHO_V: f64 = 0.5;

/// A finite-dimensional quasilinear system with its derivative data.
///
/// All evaluators are pure; a model is immutable once built and can be
/// shared across threads.
#[derive(Clone)]
pub struct ProblemModel {
    n: usize,
    m: usize,
    a: MatrixFn,
    f: VectorFn,
    da: Option<DirectionalFn>,
    df: Option<MatrixFn>,
    psi: Option<VectorFn>,
    rho_v: f64,
    reference: Option<DVector<f64>>,
}

impl fmt::Debug for ProblemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemModel")
            .field("n", &self.n)
            .field("m", &self.m)
            .field(
                "analytic_derivatives",
                &(self.da.is_some() && self.df.is_some()),
            )
            .field("psi", &self.psi.is_some())
            .field("rho_v", &self.rho_v)
            .field("reference", &self.reference)
            .finish()
    }
}

impl ProblemModel {
    pub fn new(n: usize, m: usize, a: MatrixFn, f: VectorFn) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::InvalidArgument(format!(
                "manifold dimension must satisfy 1 <= m < n (m = {m}, n = {n})"
            )));
        }
        Ok(Self {
            n,
            m,
            a,
            f,
            da: None,
            df: None,
            psi: None,
            rho_v: DEFAULT_RHO_V,
            reference: None,
        })
    }

    pub fn with_derivatives(mut self, da: DirectionalFn, df: MatrixFn) -> Self {
        self.da = Some(da);
        self.df = Some(df);
        self
    }

    pub fn with_psi(mut self, psi: VectorFn) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn with_rho_v(mut self, rho_v: f64) -> Self {
        self.rho_v = rho_v;
        self
    }

    /// Attaches the reference equilibrium used for domain checks.
    pub fn with_reference(mut self, u_star: DVector<f64>) -> Self {
        self.reference = Some(u_star);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rho_v(&self) -> f64 {
        self.rho_v
    }

    pub fn reference(&self) -> Option<&DVector<f64>> {
        self.reference.as_ref()
    }

    pub fn has_psi(&self) -> bool {
        self.psi.is_some()
    }

    pub fn psi(&self, zeta: &DVector<f64>) -> Option<DVector<f64>> {
        self.psi.as_ref().map(|p| p(zeta))
    }

    pub fn a_matrix(&self, u: &DVector<f64>) -> DMatrix<f64> {
        (self.a)(u)
    }

    pub fn source(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.f)(u)
    }

    /// `[A'(u)w]`, analytic when supplied, otherwise by central differences.
    pub fn a_derivative(&self, u: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        match &self.da {
            Some(da) => da(u, w),
            None => {
                let h = fd_step(u) / w.norm().max(1.0);
                let up = u + w * h;
                let um = u - w * h;
                ((self.a)(&up) - (self.a)(&um)) / (2.0 * h)
            }
        }
    }

    /// `F'(u)`, analytic when supplied, otherwise by central differences.
    pub fn source_jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        match &self.df {
            Some(df) => df(u),
            None => {
                let h = fd_step(u);
                let mut jac = DMatrix::zeros(self.n, self.n);
                for j in 0..self.n {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[j] += h;
                    um[j] -= h;
                    let col = ((self.f)(&up) - (self.f)(&um)) / (2.0 * h);
                    jac.set_column(j, &col);
                }
                jac
            }
        }
    }

    fn check_domain(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "state vector",
                expected: self.n,
                found: u.len(),
            });
        }
        if let Some(r) = &self.reference {
            let distance = (u - r).norm();
            if !(distance <= self.rho_v) {
                return Err(Error::DomainViolation {
                    distance,
                    radius: self.rho_v,
                });
            }
        }
        Ok(())
    }

    /// `f(u) = F(u) - A(u)u`, so the system reads `u' = f(u)`.
    pub fn eval_rhs(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_domain(u)?;
        Ok(self.rhs_unchecked(u))
    }

    pub(crate) fn rhs_unchecked(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.f)(u) - (self.a)(u) * u
    }

    /// `Df(u) = F'(u) - A(u) - [A'(u)·]u`.
    pub fn eval_rhs_jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_domain(u)?;
        Ok(self.rhs_jacobian_unchecked(u))
    }

    pub(crate) fn rhs_jacobian_unchecked(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = self.source_jacobian(u) - self.a_matrix(u);
        for j in 0..self.n {
            let e = DVector::from_fn(self.n, |i, _| if i == j { 1.0 } else { 0.0 });
            let col = self.a_derivative(u, &e) * u;
            let mut c = jac.column_mut(j);
            c -= col;
        }
        jac
    }
}

impl ProblemModel {
    /// The raw `A` evaluator (shares the closure).
    pub fn a_matrix_fn(&self) -> MatrixFn {
        Arc::clone(&self.a)
    }

    /// The raw `F` evaluator (shares the closure).
    pub fn source_fn(&self) -> VectorFn {
        Arc::clone(&self.f)
    }
}

fn fd_step(u: &DVector<f64>) -> f64 {
    1e-6 * (1.0 + u.norm())
}
