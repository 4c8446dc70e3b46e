//! Compiled-in test problems whose foliations are known in closed form.
//! The derivations of the fiber oracles live in `docs/problems.md`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::ProblemModel;
use crate::error::{Error, Result};

/// `(u_star, boundary vector, base-point vector ξ) ↦ exact fiber point`.
pub type FiberOracle = fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>;

const EQUILIBRIUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ProblemRegistryEntry {
    pub name: String,
    pub model: ProblemModel,
    pub u_star: DVector<f64>,
    pub stable_oracle: Option<FiberOracle>,
    pub unstable_oracle: Option<FiberOracle>,
}

impl ProblemRegistryEntry {
    /// Moves the reference equilibrium to `u_star`, which must be an equilibrium.
    pub fn with_equilibrium(mut self, u_star: DVector<f64>) -> Result<Self> {
        if u_star.len() != self.model.n() {
            return Err(Error::DimensionMismatch {
                what: "equilibrium",
                expected: self.model.n(),
                found: u_star.len(),
            });
        }
        let residual = self.model.rhs_unchecked(&u_star).norm();
        if residual > 1e-10 {
            return Err(Error::NotEquilibrium {
                residual,
                tolerance: 1e-10,
            });
        }
        self.model = self.model.with_reference(u_star.clone());
        self.u_star = u_star;
        Ok(self)
    }
}

pub fn problem_names() -> &'static [&'static str] {
    &[
        "linear-diag",
        "line-stable",
        "line-hyperbolic",
        "parabola-stable",
        "nilpotent-demo",
    ]
}

pub fn get_problem(name: &str) -> Result<ProblemRegistryEntry> {
    get_problem_with_params(name, &BTreeMap::new())
}

/// Looks up a built-in problem, applying named scalar parameters.
pub fn get_problem_with_params(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<ProblemRegistryEntry> {
    let allowed: &[&str] = match name {
        "linear-diag" => &["stable_rate", "unstable_rate"],
        "line-stable" | "line-hyperbolic" | "parabola-stable" | "nilpotent-demo" => &[],
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::UnknownParameter {
            problem: name.to_string(),
            name: bad.clone(),
        });
    }
    let param = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);

    let entry = match name {
        "linear-diag" => {
            let (a, b) = (param("stable_rate", 1.0), param("unstable_rate", 1.0));
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidArgument(
                    "linear-diag rates must be positive".into(),
                ));
            }
            linear_diag(a, b)
        }
        "line-stable" => line_stable(),
        "line-hyperbolic" => line_hyperbolic(),
        "parabola-stable" => parabola_stable(),
        _ => nilpotent_demo(),
    };
    let residual = entry.model.rhs_unchecked(&entry.u_star).norm();
    debug_assert!(residual <= EQUILIBRIUM_TOL);
    Ok(entry)
}

fn vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn entry(
    name: &str,
    model: ProblemModel,
    stable_oracle: Option<FiberOracle>,
    unstable_oracle: Option<FiberOracle>,
) -> ProblemRegistryEntry {
    let u_star = DVector::zeros(model.n());
    ProblemRegistryEntry {
        name: name.to_string(),
        model: model.with_reference(u_star.clone()),
        u_star,
        stable_oracle,
        unstable_oracle,
    }
}

fn linear_diag(a: f64, b: f64) -> ProblemRegistryEntry {
    let model = ProblemModel::new(
        3,
        1,
        Arc::new(move |_| DMatrix::from_diagonal(&vec(&[0.0, a, -b]))),
        Arc::new(|_| DVector::zeros(3)),
    )
    .expect("valid dimensions")
    .with_derivatives(
        Arc::new(|_, _| DMatrix::zeros(3, 3)),
        Arc::new(|_| DMatrix::zeros(3, 3)),
    )
    .with_psi(Arc::new(|z| vec(&[z[0], 0.0, 0.0])));
    fn linear_fiber(u_star: &DVector<f64>, b: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
        u_star + xi + b
    }
    entry("linear-diag", model, Some(linear_fiber), Some(linear_fiber))
}

fn line_stable() -> ProblemRegistryEntry {
    let model = ProblemModel::new(
        2,
        1,
        Arc::new(|u| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0 - u[0]])),
        Arc::new(|u| vec(&[u[1] * u[1], 0.0])),
    )
    .expect("valid dimensions")
    .with_derivatives(
        Arc::new(|_, w| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -w[0]])),
        Arc::new(|u| DMatrix::from_row_slice(2, 2, &[0.0, 2.0 * u[1], 0.0, 0.0])),
    )
    .with_psi(Arc::new(|z| vec(&[z[0], 0.0])));
    fn oracle(u_star: &DVector<f64>, y0: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
        let base = u_star[0] + xi[0];
        let y = u_star[1] + y0[1];
        vec(&[1.0 - ((1.0 - base).powi(2) + y * y).sqrt(), y])
    }
    entry("line-stable", model, Some(oracle), None)
}

fn line_hyperbolic() -> ProblemRegistryEntry {
    let model = ProblemModel::new(
        3,
        1,
        Arc::new(|u| DMatrix::from_diagonal(&vec(&[0.0, 1.0 - u[0], -(1.0 - u[0])]))),
        Arc::new(|u| vec(&[u[1] * u[1] + u[2] * u[2], 0.0, 0.0])),
    )
    .expect("valid dimensions")
    .with_derivatives(
        Arc::new(|_, w| DMatrix::from_diagonal(&vec(&[0.0, -w[0], w[0]]))),
        Arc::new(|u| {
            DMatrix::from_row_slice(
                3,
                3,
                &[0.0, 2.0 * u[1], 2.0 * u[2], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            )
        }),
    )
    .with_psi(Arc::new(|z| vec(&[z[0], 0.0, 0.0])));
    fn stable(u_star: &DVector<f64>, y0: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
        let base = u_star[0] + xi[0];
        let y = y0[1];
        vec(&[1.0 - ((1.0 - base).powi(2) + y * y).sqrt(), y, 0.0])
    }
    fn unstable(u_star: &DVector<f64>, z0: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
        let base = u_star[0] + xi[0];
        let z = z0[2];
        vec(&[1.0 - ((1.0 - base).powi(2) - z * z).sqrt(), 0.0, z])
    }
    entry("line-hyperbolic", model, Some(stable), Some(unstable))
}

fn parabola_stable() -> ProblemRegistryEntry {
    let model = ProblemModel::new(
        2,
        1,
        Arc::new(|_| DMatrix::from_diagonal(&vec(&[0.0, 1.0]))),
        Arc::new(|u| vec(&[0.0, u[0] * u[0]])),
    )
    .expect("valid dimensions")
    .with_derivatives(
        Arc::new(|_, _| DMatrix::zeros(2, 2)),
        Arc::new(|u| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 2.0 * u[0], 0.0])),
    )
    .with_psi(Arc::new(|z| vec(&[z[0], z[0] * z[0]])));
    fn oracle(u_star: &DVector<f64>, y0: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
        u_star + xi + y0
    }
    entry("parabola-stable", model, Some(oracle), None)
}

fn nilpotent_demo() -> ProblemRegistryEntry {
    let model = ProblemModel::new(
        2,
        1,
        Arc::new(|_| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])),
        Arc::new(|_| DVector::zeros(2)),
    )
    .expect("valid dimensions")
    .with_derivatives(
        Arc::new(|_, _| DMatrix::zeros(2, 2)),
        Arc::new(|_| DMatrix::zeros(2, 2)),
    )
    .with_psi(Arc::new(|z| vec(&[z[0], 0.0])));
    entry("nilpotent-demo", model, None, None)
}
