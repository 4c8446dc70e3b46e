//! Local chart of the equilibrium manifold as the graph `u_star + x + φ(x)`
//! over the center subspace.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ProblemModel;
use crate::normalform::{eval_g, SUBSPACE_TOL};
use crate::spectral::{check_normally_hyperbolic, Component, SpectralSplit};

pub const NEWTON_MAX_ITERS: usize = 25;
pub const NEWTON_TOL: f64 = 1e-11;
/// Residual threshold of [`verify_chart`].
pub const CHART_TOL: f64 = 1e-9;
const MEMO_QUANTUM: f64 = 1e-12;

/// How `φ` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartRoute {
    /// Invert `g(ζ) = P_c(Ψ(ζ) - u_star)` and project the parametrization.
    Parametrization,
    /// Solve `P_s f = P_u f = 0` on the affine slice through `x`.
    EquilibriumSystem,
}

/// Pair `(φ_s(x), φ_u(x))` as full vectors.
pub type PhiPair = (DVector<f64>, DVector<f64>);

#[derive(Debug)]
pub struct EquilibriumChart {
    model: ProblemModel,
    split: Arc<SpectralSplit>,
    u_star: DVector<f64>,
    rho_0: f64,
    route: ChartRoute,
    zeta_base: DVector<f64>,
    v_h: DMatrix<f64>,
    w_h: DMatrix<f64>,
    memo: Mutex<HashMap<Vec<i64>, PhiPair>>,
}

/// `min(0.3, ρ_V / 2)`.
pub fn default_rho_0(model: &ProblemModel) -> f64 {
    0.3f64.min(model.rho_v() / 2.0)
}

/// Builds the chart, through `Ψ` when the model has one.
pub fn build_chart(
    model: &ProblemModel,
    split: Arc<SpectralSplit>,
    u_star: &DVector<f64>,
) -> Result<EquilibriumChart> {
    let route = if model.has_psi() {
        ChartRoute::Parametrization
    } else {
        ChartRoute::EquilibriumSystem
    };
    build_chart_with(model, split, u_star, route)
}

pub fn build_chart_with(
    model: &ProblemModel,
    split: Arc<SpectralSplit>,
    u_star: &DVector<f64>,
    route: ChartRoute,
) -> Result<EquilibriumChart> {
    let report = check_normally_hyperbolic(&split, model.m());
    if !report.classification.passes() {
        return Err(Error::Precondition(format!(
            "chart needs a normally hyperbolic or normally stable equilibrium: {:?}",
            report.classification
        )));
    }
    if route == ChartRoute::Parametrization && !model.has_psi() {
        return Err(Error::InvalidArgument(
            "parametrization route requested for a model without psi".into(),
        ));
    }
    let n = model.n();
    let (mc, ms, mu) = split.dims;
    let mut v_h = DMatrix::zeros(n, ms + mu);
    let mut w_h = DMatrix::zeros(ms + mu, n);
    v_h.columns_mut(0, ms).copy_from(split.v(Component::Stable));
    v_h.columns_mut(ms, mu)
        .copy_from(split.v(Component::Unstable));
    w_h.rows_mut(0, ms).copy_from(split.w(Component::Stable));
    w_h.rows_mut(ms, mu).copy_from(split.w(Component::Unstable));
    let mut chart = EquilibriumChart {
        model: model.clone(),
        split,
        u_star: u_star.clone(),
        rho_0: default_rho_0(model),
        route,
        zeta_base: DVector::zeros(mc),
        v_h,
        w_h,
        memo: Mutex::new(HashMap::new()),
    };
    if route == ChartRoute::Parametrization {
        // parameter of u_star itself; zero unless the reference was moved
        chart.zeta_base = chart.invert_g(&DVector::zeros(mc), &DVector::zeros(mc))?;
    }
    Ok(chart)
}

impl EquilibriumChart {
    pub fn with_rho_0(mut self, rho_0: f64) -> Result<Self> {
        if !(rho_0 > 0.0) {
            return Err(Error::InvalidArgument("rho_0 must be positive".into()));
        }
        self.rho_0 = rho_0;
        Ok(self)
    }

    pub fn model(&self) -> &ProblemModel {
        &self.model
    }

    pub fn split(&self) -> &Arc<SpectralSplit> {
        &self.split
    }

    pub fn u_star(&self) -> &DVector<f64> {
        &self.u_star
    }

    pub fn rho_0(&self) -> f64 {
        self.rho_0
    }

    pub fn route(&self) -> ChartRoute {
        self.route
    }

    fn center_coords(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.model.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                what: "center vector",
                expected: n,
                found: x.len(),
            });
        }
        let dev = self.split.subspace_deviation(Component::Center, x);
        if dev > SUBSPACE_TOL {
            return Err(Error::NotInSubspace {
                component: "center",
                deviation: dev,
            });
        }
        Ok(self.split.w(Component::Center) * x)
    }

    /// `(φ_s(x), φ_u(x))`; `x` must lie in `range(P_c)`.
    pub fn phi(&self, x: &DVector<f64>) -> Result<PhiPair> {
        let c = self.center_coords(x)?;
        let key: Vec<i64> = c
            .iter()
            .map(|v| (v / MEMO_QUANTUM).round() as i64)
            .collect();
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let pair = match self.route {
            ChartRoute::Parametrization => {
                let zeta = self.invert_g(&c, &self.zeta_base)?;
                let d = self.model.psi(&zeta).expect("route requires psi") - &self.u_star;
                (&self.split.p_s * &d, &self.split.p_u * &d)
            }
            ChartRoute::EquilibriumSystem => {
                let w = self.solve_equilibrium_slice(x)?;
                (&self.split.p_s * &w, &self.split.p_u * &w)
            }
        };
        self.memo
            .lock()
            .expect("memo lock")
            .insert(key, pair.clone());
        Ok(pair)
    }

    /// `φ_s(x) + φ_u(x)`.
    pub fn phi_total(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (s, u) = self.phi(x)?;
        Ok(s + u)
    }

    /// The equilibrium `u_star + x + φ(x)`.
    pub fn point(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.u_star + x + self.phi_total(x)?)
    }

    /// `dφ(x)` as an n×n matrix acting on `P_c h`, from the implicit derivative
    /// of `P_h f(u_star + x + φ(x)) = 0`.
    pub fn dphi(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let u = self.point(x)?;
        let jac = self.model.eval_rhs_jacobian(&u)?;
        let m = &self.w_h * &jac * &self.v_h;
        let rhs = &self.w_h * &jac * &self.split.p_c;
        let lu = m.lu();
        let sol = lu
            .solve(&rhs)
            .ok_or(Error::Singular("linearized equilibrium system"))?;
        Ok(-(&self.v_h * sol))
    }

    /// Newton for `W_c(Ψ(ζ) - u_star) = c`.
    fn invert_g(&self, c: &DVector<f64>, start: &DVector<f64>) -> Result<DVector<f64>> {
        let w_c = self.split.w(Component::Center);
        let psi = |z: &DVector<f64>| self.model.psi(z).expect("route requires psi");
        let g = |z: &DVector<f64>| w_c * (psi(z) - &self.u_star) - c;
        let jac = |z: &DVector<f64>| {
            let k = z.len();
            let h = 1e-6 * (1.0 + z.norm());
            let mut d = DMatrix::zeros(w_c.nrows(), k);
            for j in 0..k {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += h;
                zm[j] -= h;
                d.set_column(j, &(w_c * (psi(&zp) - psi(&zm)) / (2.0 * h)));
            }
            d
        };
        let j0 = jac(start);
        if linalg::numerical_rank(&j0, 1e-8) < j0.ncols() {
            return Err(Error::Singular("chart map g (rank of psi' below m)"));
        }
        let mut zeta = start.clone();
        let mut r = g(&zeta);
        for _ in 0..NEWTON_MAX_ITERS {
            if r.norm() <= NEWTON_TOL {
                return Ok(zeta);
            }
            let step = linalg::solve(&jac(&zeta), &r, "chart map g")?;
            zeta -= step;
            r = g(&zeta);
        }
        if r.norm() <= NEWTON_TOL {
            return Ok(zeta);
        }
        Err(Error::NewtonFailed {
            what: "chart parameter",
            iterations: NEWTON_MAX_ITERS,
            residual: r.norm(),
        })
    }

    /// Newton for `W_h f(u_star + x + V_h a) = 0`; returns `V_h a`.
    fn solve_equilibrium_slice(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let base = &self.u_star + x;
        let mut a = DVector::zeros(self.v_h.ncols());
        let mut u = base.clone();
        let mut r = &self.w_h * self.model.eval_rhs(&u)?;
        for _ in 0..NEWTON_MAX_ITERS {
            if r.norm() <= NEWTON_TOL {
                return Ok(&self.v_h * a);
            }
            let jac = &self.w_h * self.model.eval_rhs_jacobian(&u)? * &self.v_h;
            a -= linalg::solve(&jac, &r, "equilibrium slice")?;
            u = &base + &self.v_h * &a;
            r = &self.w_h * self.model.eval_rhs(&u)?;
        }
        if r.norm() <= NEWTON_TOL {
            return Ok(&self.v_h * a);
        }
        Err(Error::NewtonFailed {
            what: "chart graph",
            iterations: NEWTON_MAX_ITERS,
            residual: r.norm(),
        })
    }

    /// Uniform sample from the center ball of radius `radius`.
    pub fn sample_center(&self, rng: &mut impl Rng, radius: f64) -> DVector<f64> {
        let basis = self.split.basis(Component::Center);
        let k = basis.ncols();
        let dir = loop {
            let g = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0));
            let nrm = g.norm();
            if nrm > 1e-3 && nrm <= 1.0 {
                break g / nrm;
            }
        };
        let r = radius * rng.random::<f64>().powf(1.0 / k as f64);
        basis * dir * r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartReport {
    pub samples: usize,
    /// `max |P_c G(x + φ(x))|`.
    pub center_residual: f64,
    /// `max_l |P_l G(x + φ(x)) - A_l φ_l(x)|` over `l = s, u`.
    pub hyperbolic_residual: f64,
    /// `max |f(u_star + x + φ(x))|`.
    pub equilibrium_residual: f64,
    pub passed: bool,
}

pub fn verify_chart(chart: &EquilibriumChart, samples: usize, seed: u64) -> Result<ChartReport> {
    verify_graph_map(chart, |x| chart.phi(x), samples, seed)
}

/// [`verify_chart`] for an arbitrary candidate graph map.
pub fn verify_graph_map<F>(
    chart: &EquilibriumChart,
    phi: F,
    samples: usize,
    seed: u64,
) -> Result<ChartReport>
where
    F: Fn(&DVector<f64>) -> Result<PhiPair>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = &chart.split;
    let (mut rc, mut rh, mut re) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let x = chart.sample_center(&mut rng, chart.rho_0);
        let (ps, pu) = phi(&x)?;
        let v = &x + &ps + &pu;
        let g = eval_g(&chart.model, &chart.u_star, &split.a0, &v)?;
        rc = rc.max((&split.p_c * &g).norm());
        let ls = (&split.p_s * &g - &split.a_s_full * &ps).norm();
        let lu = (&split.p_u * &g - &split.a_u_full * &pu).norm();
        rh = rh.max(ls).max(lu);
        re = re.max(chart.model.eval_rhs(&(&chart.u_star + &v))?.norm());
    }
    Ok(ChartReport {
        samples,
        center_residual: rc,
        hyperbolic_residual: rh,
        equilibrium_residual: re,
        passed: rc <= CHART_TOL && rh <= CHART_TOL && re <= CHART_TOL,
    })
}
