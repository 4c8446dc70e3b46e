//! Benchmark fixtures and groups for the spectral split, the fiber solver,
//! the decomposition and the reference flow.

use std::hint::black_box;
use std::sync::Arc;

use criterion::Criterion;
use foliation_core::{
    build_chart, decompose_initial_value, default_eps_center, get_problem, integrate, linearize,
    solve_fiber, split_spectrum, Component, EquilibriumChart, FiberKind, FiberRequest,
    NormalFormContext, ProblemRegistryEntry, SolverOptions,
};
use nalgebra::DVector;

pub fn chart(name: &str) -> (ProblemRegistryEntry, Arc<EquilibriumChart>) {
    let entry = get_problem(name).expect("registered problem");
    let a0 = linearize(&entry.model, &entry.u_star).expect("equilibrium");
    let split = split_spectrum(&a0, entry.model.m(), default_eps_center(&a0)).expect("split");
    let chart = build_chart(&entry.model, Arc::new(split), &entry.u_star).expect("chart");
    (entry, Arc::new(chart))
}

/// Context and request for one fiber point with scalar coordinates.
pub fn fiber_case(
    chart: &Arc<EquilibriumChart>,
    kind: FiberKind,
    boundary: f64,
    xi: f64,
) -> (NormalFormContext, FiberRequest) {
    let split = chart.split();
    let b = split.basis(kind.boundary_component()).column(0) * boundary;
    let x = split.basis(Component::Center).column(0) * xi;
    let ctx = NormalFormContext::new(Arc::clone(chart), &x).expect("context");
    (ctx, FiberRequest::new(kind, b, x))
}

pub fn spectral(c: &mut Criterion) {
    for name in ["line-hyperbolic", "parabola-stable"] {
        let entry = get_problem(name).expect("registered problem");
        let a0 = linearize(&entry.model, &entry.u_star).expect("equilibrium");
        c.bench_function(&format!("split_spectrum/{name}"), |b| {
            b.iter(|| split_spectrum(black_box(&a0), entry.model.m(), default_eps_center(&a0)))
        });
    }
}

pub fn fibers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_fiber");
    group.sample_size(20);
    for (name, kind) in [
        ("line-stable", FiberKind::Stable),
        ("line-hyperbolic", FiberKind::Stable),
        ("line-hyperbolic", FiberKind::Unstable),
    ] {
        let (_, ch) = chart(name);
        let (ctx, req) = fiber_case(&ch, kind, 0.1, 0.05);
        for intervals in [64, 128, 256] {
            let opts = SolverOptions {
                intervals,
                ..SolverOptions::default()
            };
            group.bench_function(format!("{name}/{}/N={intervals}", kind.name()), |b| {
                b.iter(|| solve_fiber(black_box(&ctx), black_box(&req), &opts).expect("converges"))
            });
        }
    }
    group.finish();
}

pub fn decomposition(c: &mut Criterion) {
    let (entry, ch) = chart("line-stable");
    let u0 = &entry.u_star + DVector::from_column_slice(&[0.03, -0.02]);
    let like = FiberRequest::stable(DVector::zeros(2), DVector::zeros(2));
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("decompose");
    group.sample_size(10);
    group.bench_function("line-stable", |b| {
        b.iter(|| decompose_initial_value(&ch, black_box(&u0), &like, &opts).expect("converges"))
    });
    group.finish();
}

pub fn flow(c: &mut Criterion) {
    let entry = get_problem("line-stable").expect("registered problem");
    let u0 = DVector::from_column_slice(&[1.0 - 1.01f64.sqrt(), 0.1]);
    c.bench_function("integrate/line-stable/t=30", |b| {
        b.iter(|| integrate(&entry.model, black_box(&u0), 30.0, 1e-12).expect("integrates"))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_solve() {
        let (_, ch) = chart("line-hyperbolic");
        let (ctx, req) = fiber_case(&ch, FiberKind::Unstable, 0.1, 0.05);
        let sol = solve_fiber(&ctx, &req, &SolverOptions::default()).unwrap();
        assert!(sol.residual <= 1e-9);
    }
}
