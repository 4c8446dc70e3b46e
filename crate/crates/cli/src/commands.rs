//! Subcommand implementations. Each writes its files into the output
//! directory, prints a short summary and returns the exit code.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use foliation_core::lpsolver::grid::DEFAULT_FIRST_STEP_FACTOR;
use foliation_core::lpsolver::{DEFAULT_MAX_ITERS, DEFAULT_TOL, SIGMA_FRACTION};
use foliation_core::{
    build_chart, check_normally_hyperbolic, decompose_initial_value, default_eps_center, foliate,
    get_problem_with_params, integrate, linearize, solve_fiber, verify_chart, verify_fiber,
    Classification, Component, EquilibriumChart, Error, FiberKind, FiberRequest, FiberSolution,
    GridSpec, NormalFormContext, ProblemRegistryEntry, SolverOptions, SpectralSplit,
    VerificationReport,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{
    self, cells, columns, envelope, fmt, num, opt, vector, write_csv, write_json, write_text,
};
use crate::{Cli, CliError, Command, EXIT_CHECK_FAILED, EXIT_OK, EXIT_SOLVER};

const DEFAULT_OUTPUT_DIR: &str = "foliate-out";
const FLOW_TOL: f64 = 1e-12;

pub fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.common.problem {
        cfg.problem = Some(p.clone());
    }
    if let Some(o) = &cli.common.out {
        cfg.output_dir = Some(o.clone());
    }
    if let Some(k) = &cli.common.kind {
        cfg.fiber.kind = Some(k.clone());
        cfg.foliate.kind = Some(k.clone());
        cfg.verify.kind = Some(k.clone());
    }
    match &cli.command {
        Command::Fiber(p) => {
            if let Some(b) = &p.boundary {
                cfg.fiber.boundary = Some(b.clone());
            }
            if let Some(x) = &p.xi {
                cfg.fiber.xi = Some(x.clone());
            }
        }
        Command::Decompose { u0: Some(u) } => cfg.decompose.u0 = Some(u.clone()),
        _ => {}
    }
    cfg.validate()?;
    let out = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    match cli.command {
        Command::Analyze => run_analyze(&cfg, &out),
        Command::Chart => run_chart(&cfg, &out),
        Command::Fiber(_) => run_fiber(&cfg, &out),
        Command::Foliate => run_foliate(&cfg, &out),
        Command::Decompose { .. } => run_decompose(&cfg, &out),
        Command::Verify => run_verify(&cfg, &out),
    }
}

fn load_entry(cfg: &RunConfig) -> Result<ProblemRegistryEntry, CliError> {
    let mut entry = get_problem_with_params(cfg.problem()?, &cfg.params)?;
    if let Some(u) = &cfg.equilibrium {
        entry = entry.with_equilibrium(DVector::from_column_slice(u))?;
    }
    Ok(entry)
}

fn spectral_split(entry: &ProblemRegistryEntry) -> Result<SpectralSplit, Error> {
    let a0 = linearize(&entry.model, &entry.u_star)?;
    SpectralSplit::decompose(&a0, default_eps_center(&a0))
}

fn load_chart(
    cfg: &RunConfig,
    entry: &ProblemRegistryEntry,
) -> Result<Arc<EquilibriumChart>, CliError> {
    let split = Arc::new(spectral_split(entry)?);
    let mut chart = build_chart(&entry.model, split, &entry.u_star)?;
    if let Some(r) = cfg.chart.rho_0 {
        chart = chart.with_rho_0(r)?;
    }
    Ok(Arc::new(chart))
}

fn parse_kind(kind: Option<&String>) -> Result<FiberKind, CliError> {
    kind.map_or(Ok(FiberKind::Stable), |k| {
        k.parse()
            .map_err(|e: Error| CliError::Config(e.to_string()))
    })
}

/// Request template and options from the `[solver]` section.
fn solver_setup(
    cfg: &RunConfig,
    split: &SpectralSplit,
    kind: FiberKind,
) -> Result<(FiberRequest, SolverOptions), CliError> {
    let s = &cfg.solver;
    let sigma = s.sigma.unwrap_or(SIGMA_FRACTION * split.omega);
    let mut opts = SolverOptions::default();
    if let Some(n) = s.intervals {
        opts.intervals = n;
    }
    if let Some(t) = s.horizon {
        opts.grid = Some(GridSpec::geometric(
            t,
            opts.intervals,
            DEFAULT_FIRST_STEP_FACTOR / sigma,
        )?);
    }
    opts.radius = s.radius;
    if let Some(m) = s.max_extensions {
        opts.max_extensions = m;
    }
    let n = split.n();
    let like = FiberRequest {
        kind,
        boundary: DVector::zeros(n),
        xi: DVector::zeros(n),
        sigma: s.sigma,
        tol_residual: s.tol_residual.unwrap_or(DEFAULT_TOL),
        max_iters: s.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
    };
    Ok((like, opts))
}

/// Maps coordinates in the orthonormal basis of `c` to a state vector.
fn embed(
    split: &SpectralSplit,
    c: Component,
    coords: &[f64],
    what: &'static str,
) -> Result<DVector<f64>, CliError> {
    let basis = split.basis(c);
    if coords.len() != basis.ncols() {
        return Err(Error::DimensionMismatch {
            what,
            expected: basis.ncols(),
            found: coords.len(),
        }
        .into());
    }
    Ok(basis * DVector::from_column_slice(coords))
}

fn grid_json(g: &GridSpec) -> Value {
    json!({ "horizon": num(g.horizon), "intervals": g.intervals, "ratio": num(g.ratio) })
}

fn solution_json(split: &SpectralSplit, sol: &FiberSolution) -> Value {
    let comp = sol.request.kind.boundary_component();
    json!({
        "kind": sol.request.kind.name(),
        "boundary_coords": vector(&split.to_coords(comp, &sol.request.boundary)),
        "xi_coords": vector(&split.to_coords(Component::Center, &sol.request.xi)),
        "boundary": vector(&sol.request.boundary),
        "xi": vector(&sol.request.xi),
        "u0": vector(&sol.u0),
        "x0": vector(&sol.x0),
        "recovered": vector(&sol.recovered),
        "u_infty": vector(&sol.u_infty),
        "sigma": num(sol.sigma),
        "residual": num(sol.residual),
        "iterations": sol.iterations,
        "tail_budget": num(sol.tail_budget),
        "extensions": sol.extensions,
        "grid": grid_json(&sol.grid),
        "decay_rate_est": opt(sol.decay_rate_est),
    })
}

fn verification_json(v: &VerificationReport) -> Value {
    json!({
        "horizon": num(v.horizon),
        "terminal_time": num(v.terminal_time),
        "terminal_distance": num(v.terminal_distance),
        "decay_rate": opt(v.decay_rate),
        "required_rate": num(v.required_rate),
        "exit_time": opt(v.exit_time),
        "distance_ok": v.distance_ok,
        "rate_ok": v.rate_ok,
        "base_point_mismatch": v.base_point_mismatch,
        "passed": v.passed,
    })
}

fn complex_list(zs: &[nalgebra::Complex<f64>]) -> Value {
    Value::Array(
        zs.iter()
            .map(|z| json!({ "re": num(z.re), "im": num(z.im) }))
            .collect(),
    )
}

fn show_complex(zs: &[nalgebra::Complex<f64>]) -> String {
    let parts: Vec<String> = zs
        .iter()
        .map(|z| {
            // print values below the display precision as plain zero
            let clean = |v: f64| if v.abs() < 5e-7 { 0.0 } else { v };
            if clean(z.im) == 0.0 {
                format!("{:.6}", clean(z.re))
            } else {
                format!("{:.6}{:+.6}i", clean(z.re), z.im)
            }
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn run_analyze(cfg: &RunConfig, out: &Path) -> Result<u8, CliError> {
    let entry = load_entry(cfg)?;
    let (result, text, passed) = match spectral_split(&entry) {
        Ok(split) => {
            let rep = check_normally_hyperbolic(&split, entry.model.m());
            let reason = match &rep.classification {
                Classification::Fails(r) => Value::String(r.clone()),
                _ => Value::Null,
            };
            let result = json!({
                "problem": entry.name,
                "u_star": vector(&entry.u_star),
                "n": rep.n,
                "m": rep.m,
                "eigenvalues": {
                    "center": complex_list(&split.sigma_c),
                    "stable": complex_list(&split.sigma_s),
                    "unstable": complex_list(&split.sigma_u),
                },
                "dims": { "center": rep.dims.0, "stable": rep.dims.1, "unstable": rep.dims.2 },
                "omega": num(rep.omega),
                "kappa_s": num(split.kappa_s()),
                "kappa_u": num(split.kappa_u()),
                "rank_a0": rep.rank_a0,
                "rank_a0_squared": rep.rank_a0_squared,
                "kernel_dim": rep.kernel_dim,
                "semisimple": rep.semisimple,
                "no_imaginary": rep.no_imaginary,
                "classification": rep.classification.label(),
                "reason": reason,
            });
            let mut text = format!(
                "problem {}\ncenter spectrum {}\nstable spectrum {}\nunstable spectrum {}\n\
                 dims (center, stable, unstable) = ({}, {}, {})\nomega = {:.6}\nclassification {}\n",
                entry.name,
                show_complex(&split.sigma_c),
                show_complex(&split.sigma_s),
                show_complex(&split.sigma_u),
                rep.dims.0,
                rep.dims.1,
                rep.dims.2,
                rep.omega,
                rep.classification.label()
            );
            if let Classification::Fails(r) = &rep.classification {
                text.push_str(&format!("reason: {r}\n"));
            }
            (result, text, rep.classification.passes())
        }
        Err(e) => {
            let result = json!({
                "problem": entry.name,
                "classification": "Fails",
                "reason": e.to_string(),
            });
            (
                result,
                format!(
                    "problem {}\nclassification Fails\nreason: {e}\n",
                    entry.name
                ),
                false,
            )
        }
    };
    write_json(
        &out.join("analyze.json"),
        &envelope("analyze", cfg, result)?,
    )?;
    write_text(&out.join("analyze.txt"), &text)?;
    print!("{text}");
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn run_chart(cfg: &RunConfig, out: &Path) -> Result<u8, CliError> {
    let (entry, chart) = load_chart_entry(cfg)?;
    let split = chart.split();
    let m = split.dim(Component::Center);
    let report = verify_chart(&chart, cfg.chart.samples, cfg.seed)?;
    let dphi0 = chart.dphi(&DVector::zeros(split.n()))?;

    let points: Vec<DVector<f64>> = if m == 1 {
        let p = cfg.chart.plot_points;
        let r = chart.rho_0();
        (0..p)
            .map(|i| {
                let s = if p == 1 {
                    0.0
                } else {
                    -r + 2.0 * r * i as f64 / (p - 1) as f64
                };
                split.basis(Component::Center).column(0) * s
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..cfg.chart.plot_points)
            .map(|_| chart.sample_center(&mut rng, chart.rho_0()))
            .collect()
    };
    let n = split.n();
    let mut header = columns("x", m);
    header.extend(columns("phi", n));
    header.extend(columns("u", n));
    let mut rows = Vec::with_capacity(points.len());
    for x in &points {
        let phi = chart.phi_total(x)?;
        let mut row = cells(&split.to_coords(Component::Center, x));
        row.extend(cells(&phi));
        row.extend(cells(&(chart.u_star() + x + &phi)));
        rows.push(row);
    }
    write_csv(&out.join("chart.csv"), &header, &rows)?;
    let result = json!({
        "problem": entry.name,
        "route": format!("{:?}", chart.route()),
        "rho_0": num(chart.rho_0()),
        "samples": report.samples,
        "center_residual": num(report.center_residual),
        "hyperbolic_residual": num(report.hyperbolic_residual),
        "equilibrium_residual": num(report.equilibrium_residual),
        "dphi_at_u_star": report::matrix(&dphi0),
        "passed": report.passed,
    });
    write_json(&out.join("chart.json"), &envelope("chart", cfg, result)?)?;
    println!(
        "chart of {} (rho_0 = {:.3}): center residual {:.2e}, hyperbolic residual {:.2e}, equilibrium residual {:.2e}: {}",
        entry.name,
        chart.rho_0(),
        report.center_residual,
        report.hyperbolic_residual,
        report.equilibrium_residual,
        if report.passed { "pass" } else { "FAIL" }
    );
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn load_chart_entry(
    cfg: &RunConfig,
) -> Result<(ProblemRegistryEntry, Arc<EquilibriumChart>), CliError> {
    let entry = load_entry(cfg)?;
    let chart = load_chart(cfg, &entry)?;
    Ok((entry, chart))
}

/// `t, u1..un, deviation` rows of a solved trajectory, in time order.
fn trajectory_rows(sol: &FiberSolution) -> Vec<Vec<String>> {
    let t = &sol.trajectory;
    (0..t.len())
        .map(|j| {
            let dev = &t.x[j] + &t.y[j] + &t.z[j];
            let mut row = vec![fmt(t.nodes[j])];
            row.extend(cells(&(&sol.u_infty + &dev)));
            row.push(fmt(dev.norm()));
            row
        })
        .collect()
}

pub fn run_fiber(cfg: &RunConfig, out: &Path) -> Result<u8, CliError> {
    let (entry, chart) = load_chart_entry(cfg)?;
    let split = chart.split();
    let kind = parse_kind(cfg.fiber.kind.as_ref())?;
    let (like, opts) = solver_setup(cfg, split, kind)?;
    let b = cfg
        .fiber
        .boundary
        .clone()
        .unwrap_or_else(|| vec![0.0; split.dim(kind.boundary_component())]);
    let x = cfg
        .fiber
        .xi
        .clone()
        .unwrap_or_else(|| vec![0.0; split.dim(Component::Center)]);
    let boundary = embed(split, kind.boundary_component(), &b, "boundary coordinates")?;
    let xi = embed(split, Component::Center, &x, "xi coordinates")?;
    let ctx = NormalFormContext::new(Arc::clone(&chart), &xi)?;
    let req = FiberRequest {
        boundary,
        xi,
        ..like
    };
    let sol = solve_fiber(&ctx, &req, &opts)?;
    let ver = verify_fiber(&entry.model, &sol, cfg.verify.horizon)?;

    let n = split.n();
    let mut header = vec!["t".to_string()];
    header.extend(columns("u", n));
    header.push("deviation".into());
    write_csv(
        &out.join("fiber_trajectory.csv"),
        &header,
        &trajectory_rows(&sol),
    )?;
    let mut result = solution_json(split, &sol);
    result["problem"] = json!(entry.name);
    result["verification"] = verification_json(&ver);
    write_json(&out.join("fiber.json"), &envelope("fiber", cfg, result)?)?;
    println!(
        "{} fiber of {}: u0 = {:?}, residual {:.2e}, {} iterations, verification {}",
        kind.name(),
        entry.name,
        sol.u0.iter().map(|v| fmt(*v)).collect::<Vec<_>>(),
        sol.residual,
        sol.iterations,
        if ver.passed { "pass" } else { "FAIL" }
    );
    Ok(if ver.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// Cartesian product of `axis` over `dim` coordinates.
fn product(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut acc: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dim {
        acc = acc
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    acc
}

pub fn run_foliate(cfg: &RunConfig, out: &Path) -> Result<u8, CliError> {
    let (entry, chart) = load_chart_entry(cfg)?;
    let split = chart.split();
    let kind = parse_kind(cfg.foliate.kind.as_ref())?;
    let (like, opts) = solver_setup(cfg, split, kind)?;
    let comp = kind.boundary_component();
    let (k, m, n) = (split.dim(comp), split.dim(Component::Center), split.n());
    if k == 0 {
        return Err(Error::EmptyUnstable.into());
    }
    let bs = product(&cfg.foliate.boundary.values(), k);
    let xs = product(&cfg.foliate.xi.values(), m);
    let coords: Vec<(Vec<f64>, Vec<f64>)> = bs
        .iter()
        .flat_map(|b| xs.iter().map(move |x| (b.clone(), x.clone())))
        .collect();
    let mut points = Vec::with_capacity(coords.len());
    for (b, x) in &coords {
        points.push((
            embed(split, comp, b, "boundary coordinates")?,
            embed(split, Component::Center, x, "xi coordinates")?,
        ));
    }
    let results = foliate(&chart, kind, &points, &like, &opts);
    let oracle = match kind {
        FiberKind::Stable => entry.stable_oracle,
        FiberKind::Unstable => entry.unstable_oracle,
    };

    let mut header = vec!["index".to_string(), "status".into()];
    header.extend(columns("b", k));
    header.extend(columns("xi", m));
    header.extend(columns("u0_", n));
    header.extend(["residual", "iterations", "oracle_error", "message"].map(String::from));
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (i, (((b, x), (bv, xv)), res)) in coords.iter().zip(&points).zip(&results).enumerate() {
        let mut row = vec![i.to_string()];
        match res {
            Ok(sol) => {
                row.push("ok".into());
                row.extend(b.iter().map(|v| fmt(*v)));
                row.extend(x.iter().map(|v| fmt(*v)));
                row.extend(cells(&sol.u0));
                row.push(fmt(sol.residual));
                row.push(sol.iterations.to_string());
                row.push(oracle.map_or(String::new(), |o| {
                    fmt((&sol.u0 - o(&entry.u_star, bv, xv)).amax())
                }));
                row.push(String::new());
            }
            Err(e) => {
                failed += 1;
                row.push("error".into());
                row.extend(b.iter().map(|v| fmt(*v)));
                row.extend(x.iter().map(|v| fmt(*v)));
                row.extend(std::iter::repeat_n(String::new(), n + 3));
                row.push(e.to_string());
            }
        }
        rows.push(row);
    }
    write_csv(&out.join("foliate.csv"), &header, &rows)?;
    let result = json!({
        "problem": entry.name,
        "kind": kind.name(),
        "points": rows.len(),
        "solved": rows.len() - failed,
        "failed": failed,
    });
    write_json(
        &out.join("foliate.json"),
        &envelope("foliate", cfg, result)?,
    )?;
    println!(
        "{} {} fibers of {}: {} solved, {failed} failed",
        rows.len(),
        kind.name(),
        entry.name,
        rows.len() - failed
    );
    Ok(if failed == 0 { EXIT_OK } else { EXIT_SOLVER })
}

pub fn run_decompose(cfg: &RunConfig, out: &Path) -> Result<u8, CliError> {
    let (entry, chart) = load_chart_entry(cfg)?;
    let split = chart.split();
    let u0 = cfg.decompose.u0.as_ref().ok_or_else(|| {
        CliError::Config("no initial value (set `decompose.u0` or pass --u0)".into())
    })?;
    let u0 = DVector::from_column_slice(u0);
    let (like, opts) = solver_setup(cfg, split, FiberKind::Stable)?;
    let d = decompose_initial_value(&chart, &u0, &like, &opts)?;
    let result = json!({
        "problem": entry.name,
        "u0": vector(&u0),
        "y0": vector(&d.y0),
        "xi": vector(&d.xi),
        "y0_coords": vector(&d.y0_coords),
        "xi_coords": vector(&d.xi_coords),
        "normal_form_y": vector(&d.normal_form_y),
        "u_infty": vector(&d.solution.u_infty),
        "residual": num(d.residual),
        "iterations": d.iterations,
    });
    write_json(
        &out.join("decompose.json"),
        &envelope("decompose", cfg, result)?,
    )?;
    println!(
        "u0 = lambda_s(y0, xi) with y0 coords {:?}, xi coords {:?}, residual {:.2e}",
        d.y0_coords.iter().map(|v| fmt(*v)).collect::<Vec<_>>(),
        d.xi_coords.iter().map(|v| fmt(*v)).collect::<Vec<_>>(),
        d.residual
    );
    Ok(EXIT_OK)
}

pub fn run_verify(cfg: &RunConfig, out: &Path) -> Result<u8, CliError> {
    let (entry, chart) = load_chart_entry(cfg)?;
    let split = chart.split();
    let kind = parse_kind(cfg.verify.kind.as_ref())?;
    let (like, opts) = solver_setup(cfg, split, kind)?;
    let comp = kind.boundary_component();
    let (k, m, n) = (split.dim(comp), split.dim(Component::Center), split.n());
    let mut points = Vec::with_capacity(cfg.verify.points.len());
    for p in &cfg.verify.points {
        points.push((
            embed(split, comp, &p.boundary, "boundary coordinates")?,
            embed(split, Component::Center, &p.xi, "xi coordinates")?,
        ));
    }
    let results = foliate(&chart, kind, &points, &like, &opts);

    let mut header = vec!["index".to_string(), "status".into()];
    header.extend(columns("b", k));
    header.extend(columns("xi", m));
    header.extend(
        [
            "terminal_distance",
            "decay_rate",
            "required_rate",
            "exit_time",
            "passed",
            "message",
        ]
        .map(String::from),
    );
    let mut traj_header = vec!["index".to_string(), "t".into()];
    traj_header.extend(columns("u", n));
    let (mut rows, mut traj_rows) = (Vec::new(), Vec::new());
    let mut failed = 0;
    for (i, (p, res)) in cfg.verify.points.iter().zip(&results).enumerate() {
        let mut row = vec![i.to_string()];
        let outcome = res.as_ref().map_err(|e| e.to_string()).and_then(|sol| {
            let ver =
                verify_fiber(&entry.model, sol, cfg.verify.horizon).map_err(|e| e.to_string())?;
            let t_final = match kind {
                FiberKind::Stable => ver.horizon,
                FiberKind::Unstable => -ver.horizon,
            };
            let flow =
                integrate(&entry.model, &sol.u0, t_final, FLOW_TOL).map_err(|e| e.to_string())?;
            Ok((ver, flow))
        });
        match outcome {
            Ok((ver, flow)) => {
                row.push("ok".into());
                row.extend(p.boundary.iter().map(|v| fmt(*v)));
                row.extend(p.xi.iter().map(|v| fmt(*v)));
                row.push(fmt(ver.terminal_distance));
                row.push(ver.decay_rate.map_or(String::new(), fmt));
                row.push(fmt(ver.required_rate));
                row.push(ver.exit_time.map_or(String::new(), fmt));
                row.push(ver.passed.to_string());
                row.push(String::new());
                if !ver.passed {
                    failed += 1;
                }
                for (t, s) in flow.times.iter().zip(&flow.states) {
                    let mut r = vec![i.to_string(), fmt(*t)];
                    r.extend(cells(s));
                    traj_rows.push(r);
                }
            }
            Err(msg) => {
                failed += 1;
                row.push("error".into());
                row.extend(p.boundary.iter().map(|v| fmt(*v)));
                row.extend(p.xi.iter().map(|v| fmt(*v)));
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push("false".into());
                row.push(msg);
            }
        }
        rows.push(row);
    }
    write_csv(&out.join("verify.csv"), &header, &rows)?;
    write_csv(
        &out.join("verify_trajectories.csv"),
        &traj_header,
        &traj_rows,
    )?;
    let result = json!({
        "problem": entry.name,
        "kind": kind.name(),
        "points": rows.len(),
        "passed": rows.len() - failed,
        "failed": failed,
    });
    write_json(&out.join("verify.json"), &envelope("verify", cfg, result)?)?;
    println!(
        "verified {} {} fibers of {}: {} passed, {failed} failed",
        rows.len(),
        kind.name(),
        entry.name,
        rows.len() - failed
    );
    Ok(if failed == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}
