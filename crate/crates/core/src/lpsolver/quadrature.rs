//! Exponentially fitted trapezoidal sweeps for the variation-of-constants
//! integrals.
//!
//! On each step the source is interpolated as `e^{-σ_f s}·(linear)`, and the
//! kernel `e^{X(h-s)}` is integrated exactly against it. The rule is exact
//! for sources proportional to `e^{-σ_f t}` and second order otherwise.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{expm, phi_weights};

/// Weights of one step `[t_j, t_{j+1}]` for a sweep with generator `X`.
#[derive(Debug, Clone)]
pub(crate) struct StepWeights {
    pub e: DMatrix<f64>,
    /// Weight of `R_j`.
    pub near: DMatrix<f64>,
    /// Weight of `R_{j+1}`.
    pub far: DMatrix<f64>,
}

fn shift(x: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    x + DMatrix::<f64>::identity(x.nrows(), x.nrows()) * s
}

/// Weights for `out_{j+1} = e^{Xh} out_j + ∫_{t_j}^{t_{j+1}} e^{X(t_{j+1}-τ)} R(τ) dτ`.
pub(crate) fn forward_weights(x: &DMatrix<f64>, sigma_f: f64, steps: &[f64]) -> Vec<StepWeights> {
    let y = shift(x, sigma_f);
    steps
        .iter()
        .map(|&h| {
            let (_, pa, pb) = phi_weights(&y, h);
            StepWeights {
                e: expm(&(x * h)),
                near: (&pa - &pb) * (-sigma_f * h).exp(),
                far: pb,
            }
        })
        .collect()
}

/// Weights for `out_j = e^{Xh} out_{j+1} + ∫_{t_j}^{t_{j+1}} e^{X(τ-t_j)} R(τ) dτ`.
pub(crate) fn backward_weights(x: &DMatrix<f64>, sigma_f: f64, steps: &[f64]) -> Vec<StepWeights> {
    let y = shift(x, -sigma_f);
    steps
        .iter()
        .map(|&h| {
            let (_, pa, pb) = phi_weights(&y, h);
            StepWeights {
                e: expm(&(x * h)),
                near: pb.clone(),
                far: (&pa - &pb) * (sigma_f * h).exp(),
            }
        })
        .collect()
}

pub(crate) fn sweep_forward(
    w: &[StepWeights],
    init: &DVector<f64>,
    r: &[DVector<f64>],
) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(init.clone());
    for (j, s) in w.iter().enumerate() {
        let next = &s.e * &out[j] + &s.near * &r[j] + &s.far * &r[j + 1];
        out.push(next);
    }
    out
}

pub(crate) fn sweep_backward(
    w: &[StepWeights],
    end: &DVector<f64>,
    r: &[DVector<f64>],
) -> Vec<DVector<f64>> {
    let n = w.len();
    let mut out = vec![end.clone(); n + 1];
    for j in (0..n).rev() {
        let s = &w[j];
        out[j] = &s.e * &out[j + 1] + &s.near * &r[j] + &s.far * &r[j + 1];
    }
    out
}

/// Dense matrix of the linear map `(R_0, …, R_N) ↦ (out_0, …, out_N)` of a
/// forward sweep with zero initial value.
pub(crate) fn forward_kernel(w: &[StepWeights], k: usize) -> DMatrix<f64> {
    let n = w.len();
    let mut kmat = DMatrix::zeros((n + 1) * k, (n + 1) * k);
    for (i, s) in w.iter().enumerate() {
        let prev = kmat.view((i * k, 0), (k, (i + 1) * k)).into_owned();
        let mut row = kmat.view_mut(((i + 1) * k, 0), (k, (n + 1) * k));
        row.view_mut((0, 0), (k, (i + 1) * k))
            .copy_from(&(&s.e * prev));
        let mut blk = row.view_mut((0, i * k), (k, k));
        blk += &s.near;
        row.view_mut((0, (i + 1) * k), (k, k)).copy_from(&s.far);
    }
    kmat
}

/// Dense matrix of a backward sweep with zero end value.
pub(crate) fn backward_kernel(w: &[StepWeights], k: usize) -> DMatrix<f64> {
    let n = w.len();
    let mut kmat = DMatrix::zeros((n + 1) * k, (n + 1) * k);
    for j in (0..n).rev() {
        let s = &w[j];
        let width = (n - j) * k;
        let next = kmat
            .view(((j + 1) * k, (j + 1) * k), (k, width))
            .into_owned();
        let mut row = kmat.view_mut((j * k, 0), (k, (n + 1) * k));
        row.view_mut((0, (j + 1) * k), (k, width))
            .copy_from(&(&s.e * next));
        let mut blk = row.view_mut((0, (j + 1) * k), (k, k));
        blk += &s.far;
        row.view_mut((0, j * k), (k, k)).copy_from(&s.near);
    }
    kmat
}

/// `∫_{t_j}^{t_N} g(τ) dτ` at every node of an increasing grid, with the
/// rule fitted to `e^{-σ_f τ}` decay.
pub fn integrate_to_end(nodes: &[f64], sigma_f: f64, g: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let k = g.first().map_or(0, |v| v.len());
    let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    let w = backward_weights(&DMatrix::zeros(k, k), sigma_f, &steps);
    sweep_backward(&w, &DVector::zeros(k), g)
}

/// `∫_{t_0}^{t_j} g(τ) dτ` at every node of an increasing grid.
pub fn integrate_from_start(nodes: &[f64], sigma_f: f64, g: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let k = g.first().map_or(0, |v| v.len());
    let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    let w = forward_weights(&DMatrix::zeros(k, k), sigma_f, &steps);
    sweep_forward(&w, &DVector::zeros(k), g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpsolver::grid::{Direction, GridSpec};

    fn scalar(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn exact_for_fitted_exponential() {
        let sigma = 0.81;
        let t = GridSpec::default_for(sigma).unwrap().offsets();
        let c = 0.37;
        let g: Vec<_> = t.iter().map(|&s| scalar(c * (-sigma * s).exp())).collect();
        let out = integrate_to_end(&t, sigma, &g);
        let tn = *t.last().unwrap();
        for (j, &s) in t.iter().enumerate() {
            let exact = c * ((-sigma * s).exp() - (-sigma * tn).exp()) / sigma;
            assert!((out[j][0] - exact).abs() <= 1e-14 * c / sigma);
        }
        assert!(((out[0][0] - c / sigma) / (c / sigma)).abs() < 1e-6);
    }

    #[test]
    fn convolution_matches_closed_form() {
        // y' = -λ y + e^{-μ t}, y(0) = 0  →  y = (e^{-μt} - e^{-λt}) / (λ - μ)
        let (lam, mu) = (1.3, 0.7);
        let g = GridSpec::default_for(0.9).unwrap();
        let t = g.nodes(Direction::Forward);
        let steps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let w = forward_weights(&DMatrix::from_element(1, 1, -lam), 0.9, &steps);
        let r: Vec<_> = t.iter().map(|&s| scalar((-mu * s).exp())).collect();
        let out = sweep_forward(&w, &scalar(0.0), &r);
        let err = t
            .iter()
            .zip(&out)
            .map(|(&s, o)| (o[0] - ((-mu * s).exp() - (-lam * s).exp()) / (lam - mu)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "err = {err}");
        let fine = g.refined().nodes(Direction::Forward);
        let steps: Vec<f64> = fine.windows(2).map(|w| w[1] - w[0]).collect();
        let w = forward_weights(&DMatrix::from_element(1, 1, -lam), 0.9, &steps);
        let r: Vec<_> = fine.iter().map(|&s| scalar((-mu * s).exp())).collect();
        let out = sweep_forward(&w, &scalar(0.0), &r);
        let err_fine = fine
            .iter()
            .zip(&out)
            .map(|(&s, o)| (o[0] - ((-mu * s).exp() - (-lam * s).exp()) / (lam - mu)).abs())
            .fold(0.0, f64::max);
        let ratio = err / err_fine;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio = {ratio}");
    }

    #[test]
    fn kernels_match_sweeps() {
        let x = DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, -2.0]);
        let steps = [0.1, 0.2, 0.15, 0.4];
        let r: Vec<_> = (0..5)
            .map(|j| DVector::from_vec(vec![(j as f64).sin(), (j as f64 * 0.7).cos()]))
            .collect();
        let stacked = DVector::from_iterator(10, r.iter().flat_map(|v| v.iter().copied()));
        let z = DVector::zeros(2);
        for (w, fwd) in [
            (forward_weights(&x, 0.5, &steps), true),
            (backward_weights(&x, 0.5, &steps), false),
        ] {
            let (out, k) = if fwd {
                (sweep_forward(&w, &z, &r), forward_kernel(&w, 2))
            } else {
                (sweep_backward(&w, &z, &r), backward_kernel(&w, 2))
            };
            let via_kernel = k * &stacked;
            for (j, o) in out.iter().enumerate() {
                assert!((via_kernel.rows(2 * j, 2) - o).amax() < 1e-14);
            }
        }
    }
}
