//! Fixed-step RK4 and adaptive embedded Dormand–Prince 5(4) integration on
//! the five-dimensional phase space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::state::{PhaseState, DIM};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method {
    /// Classic fixed-step fourth-order Runge–Kutta.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) embedded pair with PI-free step control.
    Dp54 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::Dp54 { rtol: 1e-10, atol: 1e-10 }, max_steps: 10_000_000 }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig { method: Method::Rk4 { step }, max_steps: 10_000_000 }
    }

    pub fn adaptive(rtol: f64, atol: f64) -> Self {
        IntegratorConfig { method: Method::Dp54 { rtol, atol }, max_steps: 10_000_000 }
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4 { step } => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(Error::Domain(format!("RK4 step {step} must be positive")));
                }
            }
            Method::Dp54 { rtol, atol } => {
                if !(rtol.is_finite() && rtol > 0.0 && atol.is_finite() && atol > 0.0) {
                    return Err(Error::Domain(format!(
                        "tolerances rtol = {rtol}, atol = {atol} must be positive"
                    )));
                }
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntegrationStatus {
    Complete,
    /// Step budget exhausted before reaching t1; trajectory is partial.
    StepBudgetExhausted,
    /// State left the finite range (blow-up); trajectory is partial.
    NonFiniteState,
    /// Adaptive step collapsed below resolvable resolution.
    StepUnderflow,
}

/// One named tracked series (a conserved quantity evaluated per step).
#[derive(Debug, Clone, Serialize)]
pub struct TrackedSeries {
    pub name: String,
    pub values: Vec<f64>,
}

/// Recorded output of one integration run: every accepted step, plus the
/// tracked quantities evaluated at each recorded state.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub tracked: Vec<TrackedSeries>,
    pub status: IntegrationStatus,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &PhaseState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory always holds the initial time")
    }

    pub fn tracked_series(&self, name: &str) -> Option<&[f64]> {
        self.tracked.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    /// Max |v(t) − v(t₀)| over a tracked series: the conservation drift.
    pub fn tracked_drift(&self, name: &str) -> Option<f64> {
        let v = self.tracked_series(name)?;
        let v0 = *v.first()?;
        Some(v.iter().fold(0.0f64, |m, x| m.max((x - v0).abs())))
    }
}

/// One classic RK4 step.
pub fn rk4_step<F>(rhs: &F, t: f64, x: &PhaseState, h: f64) -> PhaseState
where
    F: Fn(f64, &PhaseState) -> PhaseState,
{
    let k1 = rhs(t, x);
    let k2 = rhs(t + 0.5 * h, &(*x + k1 * (0.5 * h)));
    let k3 = rhs(t + 0.5 * h, &(*x + k2 * (0.5 * h)));
    let k4 = rhs(t + h, &(*x + k3 * h));
    *x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are row 7 of A; the error weights are b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One DP54 step: returns the 5th-order solution and the embedded error
/// estimate vector.
fn dp54_step<F>(rhs: &F, t: f64, x: &PhaseState, h: f64) -> (PhaseState, [f64; DIM])
where
    F: Fn(f64, &PhaseState) -> PhaseState,
{
    let mut k = [PhaseState::zeros(); 7];
    k[0] = rhs(t, x);
    for s in 1..7 {
        let mut y = *x;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                y = y + *kj * (a * h);
            }
        }
        k[s] = rhs(t + C[s] * h, &y);
    }
    // k[6] is evaluated at the 5th-order solution itself (FSAL structure),
    // so y7 built above for s = 6 is the answer.
    let mut y_new = *x;
    for (j, kj) in k.iter().enumerate().take(6) {
        let a = A[6][j];
        if a != 0.0 {
            y_new = y_new + *kj * (a * h);
        }
    }
    let mut err = [0.0; DIM];
    for i in 0..DIM {
        let mut e = 0.0;
        for (j, kj) in k.iter().enumerate() {
            e += E[j] * kj[i];
        }
        err[i] = e * h;
    }
    (y_new, err)
}

fn error_norm(err: &[f64; DIM], y_old: &PhaseState, y_new: &PhaseState, rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..DIM {
        let sc = atol + rtol * y_old[i].abs().max(y_new[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / DIM as f64).sqrt()
}

/// Core driver shared by the recording and non-recording entry points.
fn drive<F, S>(
    rhs: &F,
    x0: &PhaseState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
    mut on_step: S,
) -> Result<(PhaseState, IntegrationStatus)>
where
    F: Fn(f64, &PhaseState) -> PhaseState,
    S: FnMut(f64, &PhaseState),
{
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::NonFinite { context: "integrate: initial state" });
    }
    let (t0, t1) = tspan;
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::NonFinite { context: "integrate: time span" });
    }
    on_step(t0, x0);
    if t0 == t1 {
        return Ok((*x0, IntegrationStatus::Complete));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    match cfg.method {
        Method::Rk4 { step } => {
            let mut t = t0;
            let mut x = *x0;
            let mut n = 0usize;
            while (t1 - t) * dir > 0.0 {
                if n >= cfg.max_steps {
                    return Ok((x, IntegrationStatus::StepBudgetExhausted));
                }
                let h = dir * step.min((t1 - t).abs());
                x = rk4_step(rhs, t, &x, h);
                t += h;
                n += 1;
                if !x.is_finite() {
                    return Ok((x, IntegrationStatus::NonFiniteState));
                }
                on_step(t, &x);
            }
            Ok((x, IntegrationStatus::Complete))
        }
        Method::Dp54 { rtol, atol } => {
            let mut t = t0;
            let mut x = *x0;
            let mut h = dir * (span * 1e-3).min(span);
            let mut n = 0usize;
            while (t1 - t) * dir > 0.0 {
                if n >= cfg.max_steps {
                    return Ok((x, IntegrationStatus::StepBudgetExhausted));
                }
                if h.abs() < f64::EPSILON * t.abs().max(1.0) {
                    return Ok((x, IntegrationStatus::StepUnderflow));
                }
                if (t + h - t1) * dir > 0.0 {
                    h = t1 - t;
                }
                let (y_new, err) = dp54_step(rhs, t, &x, h);
                n += 1;
                if !y_new.is_finite() {
                    // Retry at a smaller step; if that cannot help, flag blow-up.
                    h *= 0.25;
                    if h.abs() < f64::EPSILON * t.abs().max(1.0) {
                        return Ok((x, IntegrationStatus::NonFiniteState));
                    }
                    continue;
                }
                let e = error_norm(&err, &x, &y_new, rtol, atol);
                if e <= 1.0 {
                    t += h;
                    x = y_new;
                    on_step(t, &x);
                    let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= factor;
                } else {
                    h *= (0.9 * e.powf(-0.2)).max(0.1);
                }
            }
            Ok((x, IntegrationStatus::Complete))
        }
    }
}

/// Integrates `rhs` from `x0` over `tspan` (backwards allowed), recording
/// every accepted step and evaluating `track` fields per recorded state.
pub fn integrate<F>(
    rhs: F,
    x0: &PhaseState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
    track: &[ScalarField],
) -> Result<Trajectory>
where
    F: Fn(f64, &PhaseState) -> PhaseState,
{
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut series: Vec<TrackedSeries> =
        track.iter().map(|f| TrackedSeries { name: f.name().to_string(), values: Vec::new() }).collect();
    let (_, status) = drive(&rhs, x0, tspan, cfg, |t, x| {
        times.push(t);
        states.push(*x);
        for (f, s) in track.iter().zip(series.iter_mut()) {
            s.values.push(f.eval(x));
        }
    })?;
    Ok(Trajectory { times, states, tracked: series, status })
}

/// Non-recording integration: final state only.
pub fn propagate<F>(
    rhs: F,
    x0: &PhaseState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<(PhaseState, IntegrationStatus)>
where
    F: Fn(f64, &PhaseState) -> PhaseState,
{
    drive(&rhs, x0, tspan, cfg, |_, _| {})
}

/// Refines an event crossing between recorded steps `i` and `i+1` of a
/// trajectory by bisection with local re-integration, down to
/// |event| < 1e-10 (or a time bracket of ~1e-14 relative width).
pub fn refine_crossing<F>(
    rhs: F,
    traj: &Trajectory,
    event: &ScalarField,
    i: usize,
    cfg: &IntegratorConfig,
) -> Result<(f64, PhaseState)>
where
    F: Fn(f64, &PhaseState) -> PhaseState,
{
    if i + 1 >= traj.len() {
        return Err(Error::Domain(format!("step index {i} out of range")));
    }
    let (t_lo, x_lo) = (traj.times[i], traj.states[i]);
    let (t_hi, x_hi) = (traj.times[i + 1], traj.states[i + 1]);
    let e_lo = event.eval(&x_lo);
    let e_hi = event.eval(&x_hi);
    if e_lo == 0.0 && e_hi == 0.0 {
        return Err(Error::DegenerateEvent);
    }
    if e_lo == 0.0 {
        return Ok((t_lo, x_lo));
    }
    if e_hi == 0.0 {
        return Ok((t_hi, x_hi));
    }
    if e_lo.signum() == e_hi.signum() {
        return Err(Error::NoSignChange);
    }

    let mut lo = t_lo;
    let mut hi = t_hi;
    let mut e_at_lo = e_lo;
    let mut best = (t_hi, x_hi, e_hi);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let (x_mid, status) = propagate(&rhs, &x_lo, (t_lo, mid), cfg)?;
        if status != IntegrationStatus::Complete {
            return Err(Error::Domain("event refinement integration failed".into()));
        }
        let e_mid = event.eval(&x_mid);
        if e_mid.abs() < best.2.abs() {
            best = (mid, x_mid, e_mid);
        }
        if e_mid.abs() < 1e-10 {
            return Ok((mid, x_mid));
        }
        if e_mid == 0.0 || e_mid.signum() == e_at_lo.signum() {
            lo = mid;
            e_at_lo = e_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-14 * t_hi.abs().max(1.0) {
            break;
        }
    }
    Ok((best.0, best.1))
}
