//! The Melnikov function M(θ⁰) = (1/Ω) ∫ {F,H¹}(t, θ⁰) dt along the
//! unperturbed heteroclinic orbit: numeric quadrature of the integrand,
//! the closed form −π√(2k) sech(π/2M) cos θ⁰, and simple-zero location.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{heteroclinic, HeteroclinicBranch, MelnikovSetup};
use crate::error::{Error, Result};
use crate::numerics::quad::{quad_adaptive, QuadResult};

/// Quadrature settings for the truncated improper integral.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadConfig {
    /// Truncation half-width T; the tail beyond ±T is bounded by
    /// 4√(2k)·M·e^(−MT).
    pub truncation: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl QuadConfig {
    /// Default settings for a given Casimir radius: T = 50/M puts the
    /// analytic tail below 1e-20.
    pub fn for_radius(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!("Casimir radius M = {m} must be positive")));
        }
        Ok(QuadConfig { truncation: 50.0 / m, abs_tol: 1e-10, max_panels: 4000 })
    }

    fn validate(&self) -> Result<()> {
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return Err(Error::Domain(format!(
                "truncation T = {} must be positive",
                self.truncation
            )));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::Domain(format!("abs_tol {} must be positive", self.abs_tol)));
        }
        Ok(())
    }

    /// Analytic bound on the neglected tail |∫_{|t|>T} integrand dt|.
    pub fn tail_bound(&self, s: &MelnikovSetup) -> f64 {
        4.0 * (2.0 * s.k()).sqrt() * s.m() * (-s.m() * self.truncation).exp()
    }
}

/// Melnikov integrand {F,H¹}(t, θ⁰) = −μ₁(t)μ₂(t)·√(2k)·sin(t + θ⁰)
/// along the unperturbed orbit. For the (+,+,+) branch this is
/// −√(2k)·M²·sech(Mt)·tanh(Mt)·sin(t + θ⁰); branches with s₃ = −1 negate it.
pub fn integrand(t: f64, s: &MelnikovSetup, b: &HeteroclinicBranch) -> f64 {
    debug_assert_eq!(b.m(), s.m(), "branch/setup radius mismatch");
    let mu = heteroclinic(t, b);
    -mu[0] * mu[1] * (2.0 * s.k()).sqrt() * (t + s.theta0()).sin()
}

/// Numeric Melnikov value (1/Ω)∫ integrand dt over [−T, T] by adaptive
/// Gauss–Kronrod quadrature. `converged == false` in the result flags a
/// quadrature failure with the best estimate retained.
pub fn melnikov_numeric(
    s: &MelnikovSetup,
    b: &HeteroclinicBranch,
    quad: &QuadConfig,
) -> Result<QuadResult> {
    quad.validate()?;
    if b.m() != s.m() {
        return Err(Error::Domain(format!(
            "branch radius M = {} does not match setup M = {}",
            b.m(),
            s.m()
        )));
    }
    let setup = *s;
    let branch = *b;
    let mut r = quad_adaptive(
        move |t| integrand(t, &setup, &branch),
        -quad.truncation,
        quad.truncation,
        quad.abs_tol,
        quad.max_panels,
    )?;
    r.value /= s.omega();
    Ok(r)
}

/// Closed form −π√(2k)·sech(π/(2M))·cos θ⁰ (the (+,+,+) branch).
pub fn melnikov_closed(s: &MelnikovSetup) -> f64 {
    -closed_amplitude(s) * s.theta0().cos()
}

/// The positive amplitude π√(2k)·sech(π/(2M)); also |dM/dθ⁰| at the zeros.
pub fn closed_amplitude(s: &MelnikovSetup) -> f64 {
    PI * (2.0 * s.k()).sqrt() / (PI / (2.0 * s.m())).cosh()
}

/// A located zero of M(θ⁰) with its slope.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MelnikovZero {
    pub theta0: f64,
    /// dM/dθ⁰ at the zero, central-differenced on the numeric profile;
    /// nonzero magnitude certifies simplicity.
    pub derivative: f64,
}

/// M(θ⁰) sampled on a uniform grid of [0, 2π), numeric vs closed form,
/// with located zeros.
#[derive(Debug, Clone, Serialize)]
pub struct MelnikovProfile {
    pub setup: MelnikovSetup,
    pub branch: HeteroclinicBranch,
    pub quad: QuadConfig,
    pub theta0_grid: Vec<f64>,
    pub numeric: Vec<f64>,
    pub closed: Vec<f64>,
    pub zeros: Vec<MelnikovZero>,
    /// True when no sign change exists on the grid (k = 0 collapses the
    /// profile to zero); `zeros` is then empty.
    pub degenerate: bool,
    /// False if any grid quadrature failed to reach tolerance.
    pub quad_converged: bool,
}

impl MelnikovProfile {
    /// max |numeric − closed| over the grid. The closed form corresponds to
    /// the (+,+,+) branch, so the s₃ sign is applied before comparing.
    pub fn max_abs_err(&self) -> f64 {
        let s3 = self.branch.sign_values()[2];
        self.numeric
            .iter()
            .zip(&self.closed)
            .fold(0.0f64, |m, (n, c)| m.max((n - s3 * c).abs()))
    }
}

/// Builds the profile on `n_points` uniform phases, evaluating quadratures
/// in parallel, then locates and refines the zeros.
pub fn melnikov_profile(
    s: &MelnikovSetup,
    b: &HeteroclinicBranch,
    n_points: usize,
    quad: &QuadConfig,
) -> Result<MelnikovProfile> {
    if n_points < 2 {
        return Err(Error::Domain(format!("profile needs at least 2 grid points, got {n_points}")));
    }
    quad.validate()?;
    if b.m() != s.m() {
        return Err(Error::Domain(format!(
            "branch radius M = {} does not match setup M = {}",
            b.m(),
            s.m()
        )));
    }
    let grid: Vec<f64> = (0..n_points).map(|i| i as f64 * TAU / n_points as f64).collect();
    let evals: Vec<(f64, bool, f64)> = grid
        .par_iter()
        .map(|&th| {
            let st = s.with_theta0(th)?;
            let num = melnikov_numeric(&st, b, quad)?;
            Ok::<_, Error>((num.value, num.converged, melnikov_closed(&st)))
        })
        .collect::<Result<_>>()?;
    let numeric: Vec<f64> = evals.iter().map(|e| e.0).collect();
    let quad_converged = evals.iter().all(|e| e.1);
    let closed: Vec<f64> = evals.iter().map(|e| e.2).collect();

    let mut profile = MelnikovProfile {
        setup: *s,
        branch: *b,
        quad: *quad,
        theta0_grid: grid,
        numeric,
        closed,
        zeros: Vec::new(),
        degenerate: false,
        quad_converged,
    };
    let zeros = find_zeros(&profile)?;
    profile.degenerate = zeros.is_empty();
    profile.zeros = zeros;
    Ok(profile)
}

/// Locates zeros of the numeric profile by sign-change bracketing on the
/// grid followed by bisection on fresh quadratures; the slope at each zero
/// comes from a central difference of the numeric function. Returns an
/// empty list when the profile has no sign change (degenerate, e.g. k = 0).
pub fn find_zeros(profile: &MelnikovProfile) -> Result<Vec<MelnikovZero>> {
    let n = profile.theta0_grid.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let s = profile.setup;
    let b = profile.branch;
    let quad = profile.quad;
    let eval = |theta: f64| -> Result<f64> {
        let st = s.with_theta0(theta)?;
        Ok(melnikov_numeric(&st, &b, &quad)?.value)
    };

    let mut zeros = Vec::new();
    for i in 0..n {
        let (th_a, va) = (profile.theta0_grid[i], profile.numeric[i]);
        let (th_b, vb) = if i + 1 < n {
            (profile.theta0_grid[i + 1], profile.numeric[i + 1])
        } else {
            // Wrap pair: last grid point against the first shifted by 2*pi.
            (profile.theta0_grid[0] + TAU, profile.numeric[0])
        };
        // Resolvable sign changes only; values at quadrature-noise level
        // (k = 0 profile) never bracket.
        let noise = 10.0 * quad.abs_tol;
        if va.abs() <= noise && vb.abs() <= noise {
            continue;
        }
        if va == 0.0 || va.signum() == vb.signum() {
            continue;
        }
        let (mut lo, mut hi) = (th_a, th_b);
        let mut f_lo = va;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let fm = eval(mid)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == f_lo.signum() {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        let root = 0.5 * (lo + hi);
        let delta = 1e-3;
        let derivative = (eval(root + delta)? - eval(root - delta)?) / (2.0 * delta);
        zeros.push(MelnikovZero { theta0: crate::analytic::wrap_angle(root), derivative });
    }
    zeros.sort_by(|a, z| a.theta0.total_cmp(&z.theta0));
    Ok(zeros)
}
