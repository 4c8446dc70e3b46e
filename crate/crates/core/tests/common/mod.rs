#![allow(dead_code)]

use std::sync::Arc;

use foliation_core::{
    build_chart, default_eps_center, get_problem, linearize, split_spectrum, EquilibriumChart,
    NormalFormContext, ProblemRegistryEntry,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn setup(name: &str) -> (ProblemRegistryEntry, Arc<EquilibriumChart>) {
    let entry = get_problem(name).unwrap();
    let a0 = linearize(&entry.model, &entry.u_star).unwrap();
    let split = split_spectrum(&a0, entry.model.m(), default_eps_center(&a0)).unwrap();
    let chart = build_chart(&entry.model, Arc::new(split), &entry.u_star).unwrap();
    (entry, Arc::new(chart))
}

pub fn context(chart: &Arc<EquilibriumChart>, xi: &DVector<f64>) -> NormalFormContext {
    NormalFormContext::new(Arc::clone(chart), xi).unwrap()
}

/// `S · blockdiag(0_m, planted) · S⁻¹` with real stable, unstable and
/// complex-pair blocks.
pub fn planted(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, usize, (usize, usize, usize)) {
    let m = rng.random_range(1..=2);
    let s = rng.random_range(1..=3);
    let u = rng.random_range(0..=2);
    let n = m + s + u;
    let mut d = DMatrix::zeros(n, n);
    let mut i = m;
    while i < m + s {
        if i + 1 < m + s && rng.random_bool(0.5) {
            let (re, im) = (rng.random_range(0.5..3.0), rng.random_range(0.2..2.0));
            d[(i, i)] = re;
            d[(i + 1, i + 1)] = re;
            d[(i, i + 1)] = im;
            d[(i + 1, i)] = -im;
            i += 2;
        } else {
            d[(i, i)] = rng.random_range(0.5..3.0);
            i += 1;
        }
    }
    for j in m + s..n {
        d[(j, j)] = -rng.random_range(0.5..3.0);
    }
    let mut sm = DMatrix::<f64>::identity(n, n);
    for v in sm.iter_mut() {
        *v += rng.random_range(-0.4..0.4);
    }
    let inv = sm.clone().try_inverse().expect("well-conditioned");
    (&sm * d * inv, m, (m, s, u))
}
