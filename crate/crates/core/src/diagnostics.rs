//! Chaos evidence for the perturbed system: the first-order energy-drift
//! (Melnikov) experiment, Poincaré sections in the oscillator phase,
//! largest-Lyapunov-exponent estimation, and parameter sweeps.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    cart_to_action_angle, unperturbed_orbit, wrap_angle, HeteroclinicBranch, MelnikovSetup,
};
use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::melnikov::{closed_amplitude, melnikov_closed, QuadConfig};
use crate::models::{
    self, transformed_rhs_unchecked,
};
use crate::numerics::{integrate, propagate, refine_crossing, IntegrationStatus, IntegratorConfig};
use crate::state::PhaseState;

/// Canonical near-separatrix seed: the unperturbed orbit point at t = 0
/// for the chosen (M, k, θ⁰) and branch.
pub fn separatrix_seed(s: &MelnikovSetup, b: &HeteroclinicBranch) -> Result<PhaseState> {
    unperturbed_orbit(0.0, s, b)
}

/// A regular cylinder orbit away from the separatrix, at the matched total
/// energy h = M² + k: μ = (M, 0, M/2) (so F = 0.625 M² < h̃), with the
/// action absorbing the remainder I = h − F.
pub fn regular_seed(s: &MelnikovSetup) -> Result<PhaseState> {
    let m = s.m();
    let mu = [m, 0.0, 0.5 * m];
    let f = 0.5 * (mu[0] * mu[0] + 2.0 * mu[1] * mu[1] + mu[2] * mu[2]);
    let action = s.h() - f;
    let u = crate::analytic::action_angle_to_cart(action, s.theta0())?;
    Ok(PhaseState::from_blocks(mu, u))
}

/// Default half-window for the ΔF experiment: T = max(2, 0.8·ln(1/ε))/M.
///
/// Balances the truncated Melnikov tail (∝ e^(−MT)) against the growth of
/// the O(ε) offset from the perturbed manifolds near the saddle (∝ ε·e^(MT));
/// windows much longer than ln(1/ε)/M let the trajectory fall off the
/// saddle early and decorrelate the phase.
pub fn default_window(eps: f64, m: f64) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("coupling eps = {eps} must be in (0, 1)")));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("Casimir radius M = {m} must be positive")));
    }
    Ok((0.8 * (1.0 / eps).ln()).max(2.0) / m)
}

/// Outcome of one energy-drift experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaFResult {
    /// (F(end) − F(start)) / ε from the integrated perturbed orbit.
    pub delta_f_over_eps: f64,
    /// Closed-form prediction M(θ⁰) = −π√(2k) sech(π/2M) cos θ⁰.
    pub prediction: f64,
    /// Independent check: quadrature of {F,H¹} = −μ₁μ₂u₂ along the same
    /// perturbed orbit (corrected trapezoid); equals ΔF/ε up to O(ε).
    pub bracket_quadrature: f64,
    /// Half-window actually used.
    pub window: f64,
    pub status: IntegrationStatus,
}

/// Integrates the perturbed system from the unperturbed orbit state at
/// t = −T through t = +T and measures the slow-energy drift (ΔF)/ε against
/// the first-order prediction ε·Ω·M(θ⁰).
pub fn delta_f_experiment(
    eps: f64,
    s: &MelnikovSetup,
    b: &HeteroclinicBranch,
    t_window: f64,
    cfg: &IntegratorConfig,
) -> Result<DeltaFResult> {
    if !(eps.is_finite() && eps > 0.0 && eps <= 0.5) {
        return Err(Error::Domain(format!(
            "delta-F experiment needs 0 < eps <= 0.5, got {eps}"
        )));
    }
    if !(t_window.is_finite() && t_window > 0.0) {
        return Err(Error::Domain(format!("window T = {t_window} must be positive")));
    }
    let x0 = unperturbed_orbit(-t_window, s, b)?;
    let rhs = move |_t: f64, p: &PhaseState| transformed_rhs_unchecked(p, eps);
    let f_field = models::rossby_energy_field();
    let traj = integrate(rhs, &x0, (-t_window, t_window), cfg, &[])?;

    let f_start = f_field.eval(&x0);
    let f_end = f_field.eval(traj.last_state());
    let delta_f_over_eps = (f_end - f_start) / eps;

    // Corrected-trapezoid quadrature of g = -mu1*mu2*u2 over the recorded
    // steps; the endpoint-derivative correction h^2/12*(g'_0 - g'_1) lifts
    // the rule to fourth order.
    let g = |p: &PhaseState| -p[0] * p[1] * p[4];
    let gdot = |p: &PhaseState| {
        let v = transformed_rhs_unchecked(p, eps);
        -(v[0] * p[1] * p[4] + p[0] * v[1] * p[4] + p[0] * p[1] * v[4])
    };
    let mut bracket_quadrature = 0.0;
    for w in traj.states.windows(2).zip(traj.times.windows(2)) {
        let (pair, ts) = w;
        let h = ts[1] - ts[0];
        let (g0, g1) = (g(&pair[0]), g(&pair[1]));
        bracket_quadrature += 0.5 * h * (g0 + g1) + h * h / 12.0 * (gdot(&pair[0]) - gdot(&pair[1]));
    }

    Ok(DeltaFResult {
        delta_f_over_eps,
        prediction: melnikov_closed(s),
        bracket_quadrature,
        window: t_window,
        status: traj.status,
    })
}

/// ΔF/ε over a uniform grid of phases plus the cosine-fit amplitude.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaFProfile {
    pub thetas: Vec<f64>,
    pub results: Vec<DeltaFResult>,
    /// Least-squares coefficients of A cos θ⁰ + B sin θ⁰.
    pub amplitude_fit: (f64, f64),
    /// Closed-form amplitude −π√(2k) sech(π/2M) the fit should reproduce.
    pub predicted_amplitude: f64,
}

/// Runs [`delta_f_experiment`] on `n_phases` uniform θ⁰ values (in
/// parallel) and fits the profile to A cos θ⁰ + B sin θ⁰.
pub fn delta_f_profile(
    eps: f64,
    s: &MelnikovSetup,
    b: &HeteroclinicBranch,
    n_phases: usize,
    t_window: f64,
    cfg: &IntegratorConfig,
) -> Result<DeltaFProfile> {
    if n_phases < 2 {
        return Err(Error::Domain(format!("phase grid needs at least 2 points, got {n_phases}")));
    }
    let thetas: Vec<f64> = (0..n_phases).map(|i| i as f64 * TAU / n_phases as f64).collect();
    let results: Vec<DeltaFResult> = thetas
        .par_iter()
        .map(|&th| delta_f_experiment(eps, &s.with_theta0(th)?, b, t_window, cfg))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.delta_f_over_eps).collect();
    let amplitude_fit = fit_cosine(&thetas, &values);
    Ok(DeltaFProfile {
        thetas,
        results,
        amplitude_fit,
        predicted_amplitude: -closed_amplitude(s),
    })
}

/// Least-squares (A, B) for v(θ) ≈ A cos θ + B sin θ on a uniform grid
/// covering full periods.
pub fn fit_cosine(thetas: &[f64], values: &[f64]) -> (f64, f64) {
    let n = thetas.len().max(1) as f64;
    let a = 2.0 / n * thetas.iter().zip(values).map(|(t, v)| v * t.cos()).sum::<f64>();
    let b = 2.0 / n * thetas.iter().zip(values).map(|(t, v)| v * t.sin()).sum::<f64>();
    (a, b)
}

/// One Poincaré-section crossing of θ = θ* (increasing θ).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoincarePoint {
    pub t: f64,
    pub mu: [f64; 3],
    pub action: f64,
    /// Slow energy F(μ) at the crossing.
    pub f_energy: f64,
    /// Casimir μ₁² + μ₂² at the crossing.
    pub casimir: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareSection {
    pub points: Vec<PoincarePoint>,
    /// False when fewer than the requested crossings fit the time budget.
    pub complete: bool,
    /// False if θ̇ > 0 was violated somewhere along the sampled trajectory.
    pub direction_ok: bool,
}

impl PoincareSection {
    /// max − min of F over the crossings.
    pub fn f_spread(&self) -> f64 {
        spread(self.points.iter().map(|p| p.f_energy))
    }

    pub fn casimir_spread(&self) -> f64 {
        spread(self.points.iter().map(|p| p.casimir))
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Collects `n` crossings of the section θ = θ* (mod 2π, increasing θ)
/// starting from `x0`, refining each crossing to |θ − θ*| < 1e-10.
pub fn poincare_section(
    eps: f64,
    x0: &PhaseState,
    theta_star: f64,
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<PoincareSection> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be non-negative")));
    }
    if !theta_star.is_finite() {
        return Err(Error::NonFinite { context: "poincare_section theta_star" });
    }
    if n == 0 {
        return Ok(PoincareSection { points: Vec::new(), complete: true, direction_ok: true });
    }
    let rhs = move |_t: f64, p: &PhaseState| transformed_rhs_unchecked(p, eps);
    // theta advances at rate 1 + O(eps); time budget with 50% slack.
    let t_max = (n as f64 + 2.0) * TAU * 1.5;
    let traj = integrate(rhs, x0, (0.0, t_max), cfg, &[])?;

    // Signed angular distance to the section, continuous near the crossing.
    let event = ScalarField::new("section", move |p: &PhaseState| {
        let aa = cart_to_action_angle(p[3], p[4]);
        match aa.angle {
            Some(th) => {
                let d = wrap_angle(th - theta_star);
                if d > std::f64::consts::PI {
                    d - TAU
                } else {
                    d
                }
            }
            None => f64::NAN,
        }
    });

    let mut points = Vec::with_capacity(n);
    let mut direction_ok = true;
    let mut prev = event.eval(&traj.states[0]);
    for i in 0..traj.len().saturating_sub(1) {
        let next = event.eval(&traj.states[i + 1]);
        // Upward crossing within half a turn; wrap jumps are > pi.
        let crossing = prev < 0.0 && next >= 0.0 && (next - prev) < std::f64::consts::PI;
        if prev > 0.0 && next < prev - std::f64::consts::PI {
            // Normal forward wrap of the angle; not a direction violation.
        } else if next < prev && next >= prev - std::f64::consts::PI && (prev - next) > 1e-9 {
            direction_ok = false;
        }
        if crossing {
            let (t_star, x_star) = refine_crossing(rhs, &traj, &event, i, cfg)?;
            let mu = x_star.mu();
            let aa = cart_to_action_angle(x_star[3], x_star[4]);
            points.push(PoincarePoint {
                t: t_star,
                mu,
                action: aa.action,
                f_energy: 0.5 * (mu[0] * mu[0] + 2.0 * mu[1] * mu[1] + mu[2] * mu[2]),
                casimir: mu[0] * mu[0] + mu[1] * mu[1],
            });
            if points.len() == n {
                return Ok(PoincareSection { points, complete: true, direction_ok });
            }
        }
        prev = next;
    }
    Ok(PoincareSection { points, complete: false, direction_ok })
}

/// Benettin two-trajectory estimate of the largest Lyapunov exponent.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    /// Final running average of the log-growth rate (1/time).
    pub lambda_max: f64,
    /// Running average after each renormalization.
    pub convergence_series: Vec<f64>,
    /// max − min of the last 20% of the series.
    pub tail_variation: f64,
    pub renorm_interval: f64,
    pub total_time: f64,
    pub delta0: f64,
    /// Set when the run aborted early (blow-up or separation collapse).
    pub flag: Option<String>,
}

/// Evolves a reference trajectory and a δ₀-offset companion, renormalizing
/// the separation every `renorm_interval`, and averages the log growth.
pub fn lyapunov_mle(
    eps: f64,
    x0: &PhaseState,
    total_time: f64,
    renorm_interval: f64,
    delta0: f64,
    cfg: &IntegratorConfig,
) -> Result<LyapunovEstimate> {
    if !(total_time.is_finite() && renorm_interval.is_finite() && total_time > renorm_interval) {
        return Err(Error::Domain(format!(
            "total time {total_time} must exceed the renormalization interval {renorm_interval}"
        )));
    }
    if renorm_interval <= 0.0 {
        return Err(Error::Domain("renormalization interval must be positive".into()));
    }
    if !(delta0.is_finite() && delta0 > 0.0 && delta0 < 1e-2) {
        return Err(Error::Domain(format!("delta0 = {delta0} must be small and positive")));
    }
    if !x0.is_finite() {
        return Err(Error::NonFinite { context: "lyapunov_mle seed" });
    }
    let rhs = move |_t: f64, p: &PhaseState| transformed_rhs_unchecked(p, eps);

    // Fixed offset direction keeps runs reproducible.
    let dir = PhaseState([1.0, 1.0, 1.0, 1.0, 1.0]) * (1.0 / (5.0f64).sqrt());
    let mut reference = *x0;
    let mut companion = *x0 + dir * delta0;
    let n = (total_time / renorm_interval).floor() as usize;
    let mut log_sum = 0.0;
    let mut series = Vec::with_capacity(n);
    let mut flag = None;

    for i in 0..n {
        let (r_new, st_r) = propagate(rhs, &reference, (0.0, renorm_interval), cfg)?;
        let (c_new, st_c) = propagate(rhs, &companion, (0.0, renorm_interval), cfg)?;
        if st_r != IntegrationStatus::Complete || st_c != IntegrationStatus::Complete {
            flag = Some(format!("integration aborted at interval {i}: {st_r:?}/{st_c:?}"));
            break;
        }
        reference = r_new;
        let sep = c_new - reference;
        let d = sep.norm();
        if !(d.is_finite() && d > 0.0) {
            flag = Some(format!("separation collapsed at interval {i}"));
            break;
        }
        log_sum += (d / delta0).ln();
        series.push(log_sum / ((i + 1) as f64 * renorm_interval));
        companion = reference + sep * (delta0 / d);
    }

    if series.is_empty() {
        return Err(Error::Domain("no completed renormalization interval".into()));
    }
    let tail_start = series.len() - (series.len() / 5).max(1);
    let tail_variation = spread(series[tail_start..].iter().copied());
    Ok(LyapunovEstimate {
        lambda_max: *series.last().expect("series checked non-empty"),
        convergence_series: series,
        tail_variation,
        renorm_interval,
        total_time,
        delta0,
        flag,
    })
}

/// Which diagnostic a sweep evaluates per grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepTask {
    /// Numeric vs closed Melnikov value at the cell's phase.
    Melnikov,
    /// ΔF/ε experiment with the auto window.
    DeltaF,
    /// Largest Lyapunov exponent from the separatrix seed.
    Lyapunov,
    /// No computation; echoes the parameter tuple.
    Params,
}

impl SweepTask {
    pub fn output_columns(&self) -> &'static [&'static str] {
        match self {
            SweepTask::Melnikov => &["numeric", "closed", "abs_err"],
            SweepTask::DeltaF => &["df_over_eps", "prediction", "abs_err", "window"],
            SweepTask::Lyapunov => &["lambda_max", "tail_variation"],
            SweepTask::Params => &[],
        }
    }
}

/// Cartesian parameter grid for [`sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub eps_values: Vec<f64>,
    pub m_values: Vec<f64>,
    pub k_values: Vec<f64>,
    pub theta0_values: Vec<f64>,
    pub task: SweepTask,
}

impl SweepGrid {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps", &self.eps_values),
            ("M", &self.m_values),
            ("k", &self.k_values),
            ("theta0", &self.theta0_values),
        ] {
            if v.is_empty() {
                return Err(Error::Config(format!("sweep grid dimension '{name}' is empty")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { context: "sweep grid" });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.eps_values.len() * self.m_values.len() * self.k_values.len() * self.theta0_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One sweep row, keyed by its parameter tuple.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub m: f64,
    pub k: f64,
    pub theta0: f64,
    pub outputs: Vec<f64>,
    /// "ok" or the cell's error message; failures never abort the sweep.
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub task: SweepTask,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Evaluates the grid's task on every parameter combination, in parallel;
/// row order is the deterministic index order (ε outermost, θ⁰ innermost)
/// regardless of execution interleaving.
pub fn sweep(grid: &SweepGrid, cfg: &IntegratorConfig) -> Result<SweepTable> {
    grid.validate()?;
    let mut combos = Vec::with_capacity(grid.len());
    for &eps in &grid.eps_values {
        for &m in &grid.m_values {
            for &k in &grid.k_values {
                for &th in &grid.theta0_values {
                    combos.push((eps, m, k, th));
                }
            }
        }
    }
    let task = grid.task;
    let rows: Vec<SweepRow> = combos
        .par_iter()
        .map(|&(eps, m, k, th)| {
            let outputs = sweep_cell(task, eps, m, k, th, cfg);
            match outputs {
                Ok(outputs) => SweepRow { eps, m, k, theta0: th, outputs, status: "ok".into() },
                Err(e) => SweepRow {
                    eps,
                    m,
                    k,
                    theta0: th,
                    outputs: vec![f64::NAN; task.output_columns().len()],
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();
    let mut columns = vec!["eps".to_string(), "M".into(), "k".into(), "theta0".into()];
    columns.extend(task.output_columns().iter().map(|s| s.to_string()));
    columns.push("status".into());
    Ok(SweepTable { task, columns, rows })
}

fn sweep_cell(
    task: SweepTask,
    eps: f64,
    m: f64,
    k: f64,
    theta0: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    match task {
        SweepTask::Params => Ok(Vec::new()),
        SweepTask::Melnikov => {
            let s = MelnikovSetup::new(m, k, theta0)?;
            let b = HeteroclinicBranch::plus(m)?;
            let quad = QuadConfig::for_radius(m)?;
            let numeric = crate::melnikov::melnikov_numeric(&s, &b, &quad)?.value;
            let closed = melnikov_closed(&s);
            Ok(vec![numeric, closed, (numeric - closed).abs()])
        }
        SweepTask::DeltaF => {
            let s = MelnikovSetup::new(m, k, theta0)?;
            let b = HeteroclinicBranch::plus(m)?;
            let window = default_window(eps, m)?;
            let r = delta_f_experiment(eps, &s, &b, window, cfg)?;
            Ok(vec![
                r.delta_f_over_eps,
                r.prediction,
                (r.delta_f_over_eps - r.prediction).abs(),
                r.window,
            ])
        }
        SweepTask::Lyapunov => {
            let s = MelnikovSetup::new(m, k, theta0)?;
            let b = HeteroclinicBranch::plus(m)?;
            let seed = separatrix_seed(&s, &b)?;
            let est = lyapunov_mle(eps, &seed, 1000.0, 1.0, 1e-8, cfg)?;
            Ok(vec![est.lambda_max, est.tail_variation])
        }
    }
}
