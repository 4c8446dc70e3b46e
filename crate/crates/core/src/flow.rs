//! Independent time integration (Dormand–Prince 5(4)) used to validate
//! fibers: convergence to the base point and its exponential rate.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lpsolver::{FiberKind, FiberSolution};
use crate::model::ProblemModel;

pub const VERIFY_FLOW_TOL: f64 = 1e-12;
pub const VERIFY_DISTANCE: f64 = 1e-6;
/// Required fraction of `σ` for the fitted decay rate.
pub const VERIFY_RATE_FRACTION: f64 = 0.9;
/// Default horizon is `DEFAULT_HORIZON_FACTOR / σ`.
pub const DEFAULT_HORIZON_FACTOR: f64 = 30.0;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub terminal_state: DVector<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Time at which the trajectory left the validity ball, if it did.
    pub exit_time: Option<f64>,
}

impl FlowResult {
    pub fn terminal_time(&self) -> f64 {
        *self.times.last().expect("at least the initial state")
    }
}

// Dormand–Prince coefficients
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `u' = f(u)` from `t = 0` to `t_final` (backward when negative)
/// with absolute and relative tolerance `tol`.
///
/// Leaving the validity ball ends the integration early; it is reported in
/// `exit_time`, not as an error.
pub fn integrate(
    model: &ProblemModel,
    u0: &DVector<f64>,
    t_final: f64,
    tol: f64,
) -> Result<FlowResult> {
    if t_final == 0.0 || !t_final.is_finite() {
        return Err(Error::InvalidArgument(
            "t_final must be finite and nonzero".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut k0 = model.eval_rhs(u0)?;
    let dir = t_final.signum();
    let span = t_final.abs();
    let mut t = 0.0f64;
    let mut u = u0.clone();
    let mut h = (1e-2 * span).min(0.01 * tol.powf(0.2) / (k0.amax() + 1e-12).max(1e-3) + 1e-6);
    let (mut times, mut states) = (vec![0.0], vec![u0.clone()]);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut exit_time = None;

    let center = model.reference().cloned();
    let outside = |v: &DVector<f64>| match &center {
        Some(c) => (v - c).norm() > model.rho_v(),
        None => false,
    };

    while t < span {
        if accepted + rejected >= MAX_STEPS {
            return Err(Error::NonConvergence {
                iterations: MAX_STEPS,
                residual: h,
            });
        }
        h = h.min(span - t);
        let mut k: [DVector<f64>; 7] = std::array::from_fn(|_| DVector::zeros(u.len()));
        k[0] = k0.clone();
        let mut left_ball = false;
        for s in 1..7 {
            let mut stage = u.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    stage.axpy(dir * h * A[s][j], kj, 1.0);
                }
            }
            match model.eval_rhs(&stage) {
                Ok(v) => k[s] = v,
                Err(Error::DomainViolation { .. }) => {
                    left_ball = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if left_ball {
            if h < 1e-12 * (1.0 + span) {
                exit_time = Some(dir * t);
                break;
            }
            h *= 0.5;
            rejected += 1;
            continue;
        }
        let mut u5 = u.clone();
        let mut err = DVector::zeros(u.len());
        for s in 0..7 {
            u5.axpy(dir * h * B5[s], &k[s], 1.0);
            err.axpy(dir * h * (B5[s] - B4[s]), &k[s], 1.0);
        }
        let ratio = (0..u.len())
            .map(|i| err[i].abs() / (tol + tol * u[i].abs().max(u5[i].abs())))
            .fold(0.0, f64::max);
        let _ = C;
        if ratio <= 1.0 {
            t += h;
            u = u5;
            k0 = k[6].clone();
            accepted += 1;
            times.push(dir * t);
            states.push(u.clone());
            if outside(&u) {
                exit_time = Some(dir * t);
                break;
            }
        } else {
            rejected += 1;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= if ratio <= 1.0 {
            factor
        } else {
            factor.min(1.0)
        };
    }
    Ok(FlowResult {
        terminal_state: u,
        times,
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
        exit_time,
    })
}

/// Least-squares decay rate of `deviations` against `times`, fitted on the
/// samples inside `[lo, hi]`; `None` with fewer than three samples.
pub fn fit_decay_rate(times: &[f64], deviations: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(deviations)
        .filter(|(_, &d)| d >= lo && d <= hi && d > 0.0)
        .map(|(&t, &d)| (t, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (st, sl) = pts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mt, ml) = (st / m, sl / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |acc, p| {
        (acc.0 + (p.0 - mt) * (p.1 - ml), acc.1 + (p.0 - mt).powi(2))
    });
    if den == 0.0 {
        return None;
    }
    Some(-num / den)
}

/// Decay rate of `|u(t) - u_inf|` over the window
/// `[max(1e-10, 100·terminal deviation), 1e-2]`.
pub fn estimate_decay_rate(result: &FlowResult, u_infty: &DVector<f64>) -> Result<f64> {
    let devs: Vec<f64> = result.states.iter().map(|s| (s - u_infty).norm()).collect();
    let terminal = *devs.last().expect("at least the initial state");
    let times: Vec<f64> = result.times.iter().map(|t| t.abs()).collect();
    fit_decay_rate(&times, &devs, (100.0 * terminal).max(1e-10), 1e-2).ok_or(Error::EmptyWindow)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub horizon: f64,
    pub terminal_time: f64,
    pub terminal_distance: f64,
    pub decay_rate: Option<f64>,
    pub required_rate: f64,
    pub exit_time: Option<f64>,
    pub distance_ok: bool,
    pub rate_ok: bool,
    /// The trajectory settled, but away from `u_inf`.
    pub base_point_mismatch: bool,
    pub passed: bool,
}

/// Flows `u0` forward (stable) or backward (unstable) for `horizon` and
/// checks convergence to `u_infty` at rate at least `0.9 σ`.
pub fn verify_point(
    model: &ProblemModel,
    kind: FiberKind,
    u0: &DVector<f64>,
    u_infty: &DVector<f64>,
    sigma: f64,
    horizon: f64,
) -> Result<VerificationReport> {
    let t_final = match kind {
        FiberKind::Stable => horizon,
        FiberKind::Unstable => -horizon,
    };
    let flow = integrate(model, u0, t_final, VERIFY_FLOW_TOL)?;
    let terminal_distance = (&flow.terminal_state - u_infty).norm();
    let decay_rate = estimate_decay_rate(&flow, u_infty).ok();
    let required_rate = VERIFY_RATE_FRACTION * sigma;
    let distance_ok = flow.exit_time.is_none() && terminal_distance <= VERIFY_DISTANCE;
    let settled = flow.exit_time.is_none() && terminal_speed(model, &flow) <= VERIFY_DISTANCE;
    // an exact hit leaves nothing to fit; the distance check covers it
    let rate_ok = match decay_rate {
        Some(r) => r >= required_rate,
        None => distance_ok && (u0 - u_infty).norm() <= VERIFY_DISTANCE,
    };
    Ok(VerificationReport {
        horizon,
        terminal_time: flow.terminal_time(),
        terminal_distance,
        decay_rate,
        required_rate,
        exit_time: flow.exit_time,
        distance_ok,
        rate_ok,
        base_point_mismatch: settled && !distance_ok,
        passed: distance_ok && rate_ok,
    })
}

fn terminal_speed(model: &ProblemModel, flow: &FlowResult) -> f64 {
    model
        .eval_rhs(&flow.terminal_state)
        .map_or(f64::INFINITY, |f| f.norm())
}

/// [`verify_point`] for a solved fiber; `horizon` defaults to `30/σ`.
pub fn verify_fiber(
    model: &ProblemModel,
    sol: &FiberSolution,
    horizon: Option<f64>,
) -> Result<VerificationReport> {
    let horizon = horizon.unwrap_or(DEFAULT_HORIZON_FACTOR / sol.sigma);
    verify_point(
        model,
        sol.request.kind,
        &sol.u0,
        &sol.u_infty,
        sol.sigma,
        horizon,
    )
}
