//! Subcommand implementations: resolve flags/config/defaults, run the core
//! routines, and emit CSV/JSON with the resolved config in the header.

use std::path::PathBuf;

use lorenz5::analytic::{unperturbed_orbit, HeteroclinicBranch, MelnikovSetup};
use lorenz5::diagnostics::{
    default_window, delta_f_profile, lyapunov_mle, poincare_section, regular_seed,
    separatrix_seed, sweep, SweepGrid, SweepTask,
};
use lorenz5::melnikov::{melnikov_profile, QuadConfig};
use lorenz5::models;
use lorenz5::numerics::{integrate, IntegrationStatus, IntegratorConfig, Method};
use lorenz5::verify::{self, FaultMode};
use lorenz5::{Chart, Error, PhaseState, Result};
use serde_json::json;

use crate::config::{parse_grid, parse_state, FileConfig};
use crate::output::{emit, fmt_f64, render, Format, Meta, Table};
use crate::{Command, Common};

/// Threshold for `melnikov` to call the numeric/closed agreement good.
const MELNIKOV_ERR_TOL: f64 = 1e-8;
/// Minimum |dM/dθ⁰| for a located zero to count as simple.
const SIMPLE_SLOPE_MIN: f64 = 1e-3;
/// Relative amplitude tolerance for the deltaf fit.
const DELTAF_AMP_RTOL: f64 = 0.05;
/// Closed-form comparison threshold for `simulate --compare`.
const COMPARE_TOL: f64 = 1e-6;

/// Everything the subcommands share, resolved from flags/file/defaults.
struct Resolved {
    eps: f64,
    m: f64,
    k: f64,
    theta0: f64,
    branch: HeteroclinicBranch,
    t: Option<f64>,
    cfg: IntegratorConfig,
    format: Format,
    out: Option<PathBuf>,
    seed: u64,
}

impl Resolved {
    fn setup(&self) -> Result<MelnikovSetup> {
        MelnikovSetup::new(self.m, self.k, self.theta0)
    }

    /// Records the shared resolved values into an output header.
    fn annotate(&self, meta: &mut Meta) {
        meta.push_f64("eps", self.eps);
        meta.push_f64("M", self.m);
        meta.push_f64("k", self.k);
        meta.push_f64("theta0", self.theta0);
        meta.push("branch", self.branch.label());
        if let Some(t) = self.t {
            meta.push_f64("T", t);
        }
        match self.cfg.method {
            Method::Dp54 { rtol, atol } => {
                meta.push("method", "dp54");
                meta.push_f64("rtol", rtol);
                meta.push_f64("atol", atol);
            }
            Method::Rk4 { step } => {
                meta.push("method", "rk4");
                meta.push_f64("step", step);
            }
        }
        meta.push("seed", self.seed);
    }
}

fn resolve_common(common: &Common, default_eps: f64) -> Result<Resolved> {
    let file = FileConfig::load(common.config.as_deref())?;
    let eps = file.resolve(common.eps, "eps", default_eps)?;
    let m = file.resolve(common.m, "M", 1.0)?;
    let k = file.resolve(common.k, "k", 0.5)?;
    let theta0 = file.resolve(common.theta0, "theta0", 0.0)?;
    let branch_spec: String = file.resolve(common.branch.clone(), "branch", "+++".into())?;
    let branch: HeteroclinicBranch = branch_spec.parse::<HeteroclinicBranch>()?.with_m(m)?;
    let t = file.resolve_opt(common.t, "T")?;
    let method: String = file.resolve(common.method.clone(), "method", "dp54".into())?;
    let cfg = match method.as_str() {
        "dp54" => IntegratorConfig::adaptive(
            file.resolve(common.rtol, "rtol", 1e-10)?,
            file.resolve(common.atol, "atol", 1e-10)?,
        ),
        "rk4" => IntegratorConfig::rk4(file.resolve(common.step, "step", 1e-3)?),
        other => return Err(Error::Config(format!("method '{other}' must be dp54 or rk4"))),
    };
    let format: Format =
        file.resolve(common.format.clone(), "format", "csv".into())?.parse()?;
    let out = match &common.out {
        Some(p) => Some(p.clone()),
        None => file.resolve_opt(None::<String>, "out")?.map(PathBuf::from),
    };
    let seed = file.resolve(common.seed, "seed", verify::DEFAULT_SEED)?;
    Ok(Resolved { eps, m, k, theta0, branch, t, cfg, format, out, seed })
}

pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Verify { common, inject_fault } => cmd_verify(&common, inject_fault),
        Command::Simulate { common, chart, x0, t0, t1, compare } => {
            cmd_simulate(&common, chart, x0, t0, t1, compare)
        }
        Command::Melnikov { common, points } => cmd_melnikov(&common, points),
        Command::Deltaf { common, phases } => cmd_deltaf(&common, phases),
        Command::Lyapunov { common, total_time, renorm, delta0, seed_kind, x0 } => {
            cmd_lyapunov(&common, total_time, renorm, delta0, seed_kind, x0)
        }
        Command::Poincare { common, theta_star, crossings, seed_kind, x0 } => {
            cmd_poincare(&common, theta_star, crossings, seed_kind, x0)
        }
        Command::Sweep { common, task, grid_eps, grid_m, grid_k, grid_theta0 } => {
            cmd_sweep(&common, task, grid_eps, grid_m, grid_k, grid_theta0)
        }
    }
}

fn cmd_verify(common: &Common, inject_fault: bool) -> Result<bool> {
    let r = resolve_common(common, 0.0)?;
    let fault = if inject_fault { FaultMode::FlipJ1Pair } else { FaultMode::None };
    let checks = verify::run_all(r.seed, fault);

    let mut meta = Meta::new("verify");
    r.annotate(&mut meta);
    meta.push("inject_fault", inject_fault);

    let mut table = Table::new(&["check", "max_residual", "threshold", "samples", "pass"]);
    for c in &checks {
        table.push_row(vec![
            c.name.to_string(),
            fmt_f64(c.max_residual),
            fmt_f64(c.threshold),
            c.samples.to_string(),
            c.passed.to_string(),
        ]);
    }
    let passed = checks.iter().all(|c| c.passed);
    table.push_trailer(format!("all_passed = {passed}"));

    let data = json!({
        "checks": checks,
        "all_passed": passed,
    });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        println!("verify: {} checks, all_passed = {passed}", checks.len());
    }
    Ok(passed)
}

fn cmd_melnikov(common: &Common, points: Option<usize>) -> Result<bool> {
    let r = resolve_common(common, 0.0)?;
    let file = FileConfig::load(common.config.as_deref())?;
    let n_points = file.resolve(points, "points", 128usize)?;
    let setup = r.setup()?;
    let mut quad = QuadConfig::for_radius(r.m)?;
    if let Some(t) = r.t {
        quad.truncation = t;
    }
    let profile = melnikov_profile(&setup, &r.branch, n_points, &quad)?;
    let s3 = r.branch.sign_values()[2];

    let mut meta = Meta::new("melnikov");
    r.annotate(&mut meta);
    meta.push("points", n_points);
    meta.push_f64("quad_truncation", quad.truncation);
    meta.push_f64("quad_abs_tol", quad.abs_tol);

    let mut table = Table::new(&["theta0", "numeric", "closed", "abs_err"]);
    for i in 0..profile.theta0_grid.len() {
        let closed = s3 * profile.closed[i];
        table.push_row(vec![
            fmt_f64(profile.theta0_grid[i]),
            fmt_f64(profile.numeric[i]),
            fmt_f64(closed),
            fmt_f64((profile.numeric[i] - closed).abs()),
        ]);
    }
    table.push_trailer("zeros (theta0_star, derivative):");
    for z in &profile.zeros {
        table.push_trailer(format!("zero, {}, {}", fmt_f64(z.theta0), fmt_f64(z.derivative)));
    }
    let max_abs_err = profile.max_abs_err();
    table.push_trailer(format!("max_abs_err = {}", fmt_f64(max_abs_err)));
    table.push_trailer(format!("degenerate = {}", profile.degenerate));

    let zeros_simple = profile.zeros.iter().all(|z| z.derivative.abs() > SIMPLE_SLOPE_MIN);
    let degenerate_ok = profile.degenerate && r.k == 0.0;
    let passed = profile.quad_converged
        && max_abs_err < MELNIKOV_ERR_TOL
        && (degenerate_ok || (!profile.degenerate && zeros_simple));

    let data = json!({
        "profile": profile,
        "max_abs_err": max_abs_err,
        "passed": passed,
    });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        println!(
            "melnikov: {} points, max_abs_err = {:.3e}, {} zeros, degenerate = {}",
            n_points,
            max_abs_err,
            profile.zeros.len(),
            profile.degenerate
        );
    }
    Ok(passed)
}

fn cmd_simulate(
    common: &Common,
    chart: Option<String>,
    x0: Option<String>,
    t0: Option<f64>,
    t1: Option<f64>,
    compare: bool,
) -> Result<bool> {
    let r = resolve_common(common, 0.0)?;
    let file = FileConfig::load(common.config.as_deref())?;
    let chart_name: String = file.resolve(chart, "chart", "mu".into())?;
    let chart = match chart_name.as_str() {
        "mu" => Chart::MuU,
        "x" => Chart::X,
        other => return Err(Error::Config(format!("chart '{other}' must be mu or x"))),
    };
    let t0 = file.resolve(t0, "t0", if compare { -10.0 } else { 0.0 })?;
    let t1 = file.resolve(t1, "t1", if compare { 10.0 } else { 100.0 })?;
    let x0_spec: Option<String> = file.resolve_opt(x0, "x0")?;
    let setup = r.setup()?;

    if compare && (r.eps != 0.0 || chart != Chart::MuU || x0_spec.is_some()) {
        return Err(Error::Config(
            "--compare requires eps = 0, the mu chart and the default closed-form seed".into(),
        ));
    }

    let x0 = match &x0_spec {
        Some(s) => PhaseState::checked(parse_state(s)?, "simulate x0")?,
        None => {
            let seed_mu = if compare {
                unperturbed_orbit(t0, &setup, &r.branch)?
            } else {
                separatrix_seed(&setup, &r.branch)?
            };
            match chart {
                Chart::MuU => seed_mu,
                Chart::X => models::phi_inv(&seed_mu, r.eps)?,
            }
        }
    };

    let params = models::ModelParams::new(r.eps, chart)?;
    let track = match chart {
        Chart::X => vec![models::hamiltonian_r5_field(), models::casimir_field()],
        Chart::MuU => vec![
            models::hamiltonian_eps_field(r.eps),
            models::casimir_field(),
            models::rossby_energy_field(),
            models::action_field(),
        ],
    };
    let rhs = |_t: f64, p: &PhaseState| params.rhs(p);
    let traj = integrate(rhs, &x0, (t0, t1), &r.cfg, &track)?;

    let mut meta = Meta::new("simulate");
    r.annotate(&mut meta);
    meta.push("chart", chart_name.clone());
    meta.push_f64("t0", t0);
    meta.push_f64("t1", t1);
    meta.push("x0", x0.0.map(fmt_f64).join(","));
    meta.push("compare", compare);

    let state_cols: [&str; 5] = match chart {
        Chart::X => ["x1", "x2", "x3", "x4", "x5"],
        Chart::MuU => ["mu1", "mu2", "mu3", "u1", "u2"],
    };
    let mut columns = vec!["t"];
    columns.extend(state_cols);
    let tracked_names: Vec<String> = traj.tracked.iter().map(|s| s.name.clone()).collect();
    columns.extend(tracked_names.iter().map(|s| s.as_str()));
    let mut table = Table::new(&columns);
    for i in 0..traj.len() {
        let mut row = vec![fmt_f64(traj.times[i])];
        row.extend(traj.states[i].0.map(fmt_f64));
        for s in &traj.tracked {
            row.push(fmt_f64(s.values[i]));
        }
        table.push_row(row);
    }

    let mut passed = traj.status == IntegrationStatus::Complete;
    let mut max_deviation = None;
    if compare {
        let mut worst = 0.0f64;
        for i in 0..traj.len() {
            let reference = unperturbed_orbit(traj.times[i], &setup, &r.branch)?;
            worst = worst.max(traj.states[i].dist(&reference));
        }
        max_deviation = Some(worst);
        table.push_trailer(format!("max_deviation = {}", fmt_f64(worst)));
        passed = passed && worst < COMPARE_TOL;
    }
    if traj.status != IntegrationStatus::Complete {
        table.push_trailer(format!("FAILURE: integration ended with {:?}", traj.status));
    }

    let data = json!({
        "trajectory": traj,
        "max_deviation": max_deviation,
    });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        match max_deviation {
            Some(d) => println!("simulate: {} steps, max_deviation = {d:.3e}", traj.len()),
            None => println!("simulate: {} steps, status {:?}", traj.len(), traj.status),
        }
    }
    Ok(passed)
}

fn cmd_deltaf(common: &Common, phases: Option<usize>) -> Result<bool> {
    let r = resolve_common(common, 1e-3)?;
    let file = FileConfig::load(common.config.as_deref())?;
    let n_phases = file.resolve(phases, "phases", 16usize)?;
    let setup = r.setup()?;
    let window = match r.t {
        Some(t) => t,
        None => default_window(r.eps, r.m)?,
    };
    let profile = delta_f_profile(r.eps, &setup, &r.branch, n_phases, window, &r.cfg)?;

    let mut meta = Meta::new("deltaf");
    r.annotate(&mut meta);
    meta.push("phases", n_phases);
    meta.push_f64("window", window);

    let mut table =
        Table::new(&["theta0", "df_over_eps", "prediction", "bracket_quad", "abs_err"]);
    for (th, res) in profile.thetas.iter().zip(&profile.results) {
        table.push_row(vec![
            fmt_f64(*th),
            fmt_f64(res.delta_f_over_eps),
            fmt_f64(res.prediction),
            fmt_f64(res.bracket_quadrature),
            fmt_f64((res.delta_f_over_eps - res.prediction).abs()),
        ]);
    }
    let (fit_a, fit_b) = profile.amplitude_fit;
    let rel_err = (fit_a - profile.predicted_amplitude).abs() / profile.predicted_amplitude.abs();
    table.push_trailer(format!("fit_A = {}", fmt_f64(fit_a)));
    table.push_trailer(format!("fit_B = {}", fmt_f64(fit_b)));
    table.push_trailer(format!("predicted_amplitude = {}", fmt_f64(profile.predicted_amplitude)));
    table.push_trailer(format!("amplitude_rel_err = {}", fmt_f64(rel_err)));

    let all_complete =
        profile.results.iter().all(|res| res.status == IntegrationStatus::Complete);
    let passed = all_complete && rel_err < DELTAF_AMP_RTOL;
    if !all_complete {
        table.push_trailer("FAILURE: some experiments did not complete".to_string());
    }

    let data = json!({
        "profile": profile,
        "amplitude_rel_err": rel_err,
        "passed": passed,
    });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        println!(
            "deltaf: {n_phases} phases, fit_A = {fit_a:.6}, rel_err = {:.3}%",
            rel_err * 100.0
        );
    }
    Ok(passed)
}

fn seed_state(
    kind: Option<String>,
    x0: Option<String>,
    file: &FileConfig,
    setup: &MelnikovSetup,
    branch: &HeteroclinicBranch,
) -> Result<(PhaseState, String)> {
    let x0_spec: Option<String> = file.resolve_opt(x0, "x0")?;
    if let Some(s) = x0_spec {
        return Ok((PhaseState::checked(parse_state(&s)?, "seed state")?, format!("explicit {s}")));
    }
    let kind: String = file.resolve(kind, "seed-kind", "separatrix".into())?;
    match kind.as_str() {
        "separatrix" => Ok((separatrix_seed(setup, branch)?, kind)),
        "regular" => Ok((regular_seed(setup)?, kind)),
        other => Err(Error::Config(format!("seed-kind '{other}' must be separatrix or regular"))),
    }
}

fn cmd_lyapunov(
    common: &Common,
    total_time: Option<f64>,
    renorm: Option<f64>,
    delta0: Option<f64>,
    seed_kind: Option<String>,
    x0: Option<String>,
) -> Result<bool> {
    let r = resolve_common(common, 0.1)?;
    let file = FileConfig::load(common.config.as_deref())?;
    let total_time = file.resolve(total_time, "total-time", 1000.0)?;
    let renorm = file.resolve(renorm, "renorm", 1.0)?;
    let delta0 = file.resolve(delta0, "delta0", 1e-8)?;
    let setup = r.setup()?;
    let (seed, seed_desc) = seed_state(seed_kind, x0, &file, &setup, &r.branch)?;

    let est = lyapunov_mle(r.eps, &seed, total_time, renorm, delta0, &r.cfg)?;

    let mut meta = Meta::new("lyapunov");
    r.annotate(&mut meta);
    meta.push_f64("total-time", total_time);
    meta.push_f64("renorm", renorm);
    meta.push_f64("delta0", delta0);
    meta.push("seed-state", seed_desc);

    let mut table = Table::new(&["interval", "time", "lambda_running"]);
    for (i, l) in est.convergence_series.iter().enumerate() {
        table.push_row(vec![
            (i + 1).to_string(),
            fmt_f64((i + 1) as f64 * renorm),
            fmt_f64(*l),
        ]);
    }
    table.push_trailer(format!("lambda_max = {}", fmt_f64(est.lambda_max)));
    table.push_trailer(format!("tail_variation = {}", fmt_f64(est.tail_variation)));
    let passed = est.flag.is_none();
    if let Some(flag) = &est.flag {
        table.push_trailer(format!("FAILURE: {flag}"));
    }

    let data = json!({ "estimate": est });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        println!("lyapunov: lambda_max = {:.6} over t = {total_time}", est.lambda_max);
    }
    Ok(passed)
}

fn cmd_poincare(
    common: &Common,
    theta_star: Option<f64>,
    crossings: Option<usize>,
    seed_kind: Option<String>,
    x0: Option<String>,
) -> Result<bool> {
    let r = resolve_common(common, 0.1)?;
    let file = FileConfig::load(common.config.as_deref())?;
    let theta_star = file.resolve(theta_star, "theta-star", 0.0)?;
    let n = file.resolve(crossings, "crossings", 100usize)?;
    let setup = r.setup()?;
    let (seed, seed_desc) = seed_state(seed_kind, x0, &file, &setup, &r.branch)?;

    let section = poincare_section(r.eps, &seed, theta_star, n, &r.cfg)?;

    let mut meta = Meta::new("poincare");
    r.annotate(&mut meta);
    meta.push_f64("theta-star", theta_star);
    meta.push("crossings", n);
    meta.push("seed-state", seed_desc);

    let mut table = Table::new(&["n", "t", "mu1", "mu2", "mu3", "I", "F", "C"]);
    for (i, p) in section.points.iter().enumerate() {
        table.push_row(vec![
            (i + 1).to_string(),
            fmt_f64(p.t),
            fmt_f64(p.mu[0]),
            fmt_f64(p.mu[1]),
            fmt_f64(p.mu[2]),
            fmt_f64(p.action),
            fmt_f64(p.f_energy),
            fmt_f64(p.casimir),
        ]);
    }
    table.push_trailer(format!("f_spread = {}", fmt_f64(section.f_spread())));
    table.push_trailer(format!("casimir_spread = {}", fmt_f64(section.casimir_spread())));
    let passed = section.complete && section.direction_ok;
    if !section.complete {
        table.push_trailer(format!(
            "FAILURE: only {} of {n} crossings found within the time budget",
            section.points.len()
        ));
    }
    if !section.direction_ok {
        table.push_trailer("FAILURE: theta was not monotonically increasing".to_string());
    }

    let data = json!({ "section": section });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        println!(
            "poincare: {} crossings, F spread = {:.3e}",
            section.points.len(),
            section.f_spread()
        );
    }
    Ok(passed)
}

fn cmd_sweep(
    common: &Common,
    task: Option<String>,
    grid_eps: Option<String>,
    grid_m: Option<String>,
    grid_k: Option<String>,
    grid_theta0: Option<String>,
) -> Result<bool> {
    let r = resolve_common(common, 1e-3)?;
    let file = FileConfig::load(common.config.as_deref())?;
    let task_name: String = file.resolve(task, "task", "melnikov".into())?;
    let task = match task_name.as_str() {
        "melnikov" => SweepTask::Melnikov,
        "deltaf" => SweepTask::DeltaF,
        "lyapunov" => SweepTask::Lyapunov,
        "params" => SweepTask::Params,
        other => Err(Error::Config(format!(
            "task '{other}' must be melnikov, deltaf, lyapunov or params"
        )))?,
    };
    let axis = |flag: Option<String>, key: &str, fallback: f64| -> Result<Vec<f64>> {
        match file.resolve_opt(flag, key)? {
            Some(spec) => parse_grid(&spec),
            None => Ok(vec![fallback]),
        }
    };
    let grid = SweepGrid {
        eps_values: axis(grid_eps, "grid-eps", r.eps)?,
        m_values: axis(grid_m, "grid-m", r.m)?,
        k_values: axis(grid_k, "grid-k", r.k)?,
        theta0_values: axis(grid_theta0, "grid-theta0", r.theta0)?,
        task,
    };
    let table_data = sweep(&grid, &r.cfg)?;

    let mut meta = Meta::new("sweep");
    r.annotate(&mut meta);
    meta.push("task", &task_name);
    meta.push("cells", table_data.rows.len());

    let columns: Vec<&str> = table_data.columns.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&columns);
    for row in &table_data.rows {
        let mut cells = vec![
            fmt_f64(row.eps),
            fmt_f64(row.m),
            fmt_f64(row.k),
            fmt_f64(row.theta0),
        ];
        cells.extend(row.outputs.iter().map(|v| fmt_f64(*v)));
        cells.push(row.status.clone());
        table.push_row(cells);
    }
    let passed = table_data.rows.iter().all(|row| row.status == "ok");
    table.push_trailer(format!("all_ok = {passed}"));

    let data = json!({ "table": table_data });
    emit(r.out.as_deref(), &render(r.format, &meta, &table, data))?;
    if r.out.is_some() {
        println!("sweep: {} cells ({}), all_ok = {passed}", table_data.rows.len(), task_name);
    }
    Ok(passed)
}

