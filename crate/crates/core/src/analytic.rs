//! Closed-form objects of the unperturbed (ε = 0) system: the saddle points
//! (0, ±M, 0) on the coadjoint cylinder μ₁² + μ₂² = M², the heteroclinic
//! orbits connecting them, action-angle variables for the oscillator pair,
//! and the bookkeeping constants (h = M² + k, h̃ = M², Ω = 1).

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::transformed_rhs_unchecked;
use crate::state::PhaseState;

/// A sign factor in the heteroclinic formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if *self == Sign::Plus { '+' } else { '-' })
    }
}

/// One branch of the heteroclinic family:
/// μ₁ = s₁M sech(Mt), μ₂ = s₂M tanh(Mt), μ₃ = s₃M sech(Mt).
///
/// Substituting into the ε = 0 equations forces s₁ = s₂s₃, so only 4 of the
/// 8 sign triples are solutions; construction rejects the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicBranch {
    signs: (Sign, Sign, Sign),
    m: f64,
}

impl HeteroclinicBranch {
    pub fn try_new(s1: Sign, s2: Sign, s3: Sign, m: f64) -> Result<Self> {
        if s1.as_i8() != s2.as_i8() * s3.as_i8() {
            return Err(Error::InadmissibleBranch(s1.as_i8(), s2.as_i8(), s3.as_i8()));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!("Casimir radius M = {m} must be positive")));
        }
        Ok(HeteroclinicBranch { signs: (s1, s2, s3), m })
    }

    /// The default branch (+,+,+), the one matching the closed-form
    /// Melnikov sign.
    pub fn plus(m: f64) -> Result<Self> {
        HeteroclinicBranch::try_new(Sign::Plus, Sign::Plus, Sign::Plus, m)
    }

    /// All 4 admissible branches for a given radius.
    pub fn all(m: f64) -> Result<[HeteroclinicBranch; 4]> {
        use Sign::{Minus as N, Plus as P};
        Ok([
            HeteroclinicBranch::try_new(P, P, P, m)?,
            HeteroclinicBranch::try_new(P, N, N, m)?,
            HeteroclinicBranch::try_new(N, P, N, m)?,
            HeteroclinicBranch::try_new(N, N, P, m)?,
        ])
    }

    /// The 4 sign triples that are not solutions (negative controls).
    pub fn inadmissible_triples() -> [(Sign, Sign, Sign); 4] {
        use Sign::{Minus as N, Plus as P};
        [(P, P, N), (P, N, P), (N, P, P), (N, N, N)]
    }

    pub fn signs(&self) -> (Sign, Sign, Sign) {
        self.signs
    }

    pub fn sign_values(&self) -> [f64; 3] {
        [self.signs.0.value(), self.signs.1.value(), self.signs.2.value()]
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Compact "+++" style label.
    pub fn label(&self) -> String {
        format!("{}{}{}", self.signs.0, self.signs.1, self.signs.2)
    }
}

impl FromStr for HeteroclinicBranch {
    type Err = Error;

    /// Parses "+++", "+--", "-+-", "--+" (radius filled in later via
    /// [`HeteroclinicBranch::with_m`]); uses M = 1.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 3 || !chars.iter().all(|c| *c == '+' || *c == '-') {
            return Err(Error::Config(format!(
                "branch '{s}' must be three signs, e.g. +++ or -+-"
            )));
        }
        let sign = |c: char| if c == '+' { Sign::Plus } else { Sign::Minus };
        HeteroclinicBranch::try_new(sign(chars[0]), sign(chars[1]), sign(chars[2]), 1.0)
    }
}

impl HeteroclinicBranch {
    /// Same sign triple with a different Casimir radius.
    pub fn with_m(&self, m: f64) -> Result<Self> {
        HeteroclinicBranch::try_new(self.signs.0, self.signs.1, self.signs.2, m)
    }
}

/// Heteroclinic μ-profile at time t (μ₁, μ₂, μ₃).
pub fn heteroclinic(t: f64, b: &HeteroclinicBranch) -> [f64; 3] {
    let [s1, s2, s3] = b.sign_values();
    let m = b.m;
    let sech = 1.0 / (m * t).cosh();
    let tanh = (m * t).tanh();
    [s1 * m * sech, s2 * m * tanh, s3 * m * sech]
}

/// Analytic time derivative of [`heteroclinic`].
pub fn heteroclinic_velocity(t: f64, b: &HeteroclinicBranch) -> [f64; 3] {
    let [s1, s2, s3] = b.sign_values();
    let m = b.m;
    let m2 = m * m;
    let sech = 1.0 / (m * t).cosh();
    let tanh = (m * t).tanh();
    [-s1 * m2 * sech * tanh, s2 * m2 * sech * sech, -s3 * m2 * sech * tanh]
}

/// Max-norm defect of the sign triple (s1,s2,s3) as a candidate solution of
/// the ε = 0 μ-equations at time t. Zero (to rounding) for admissible
/// triples, order M² for the inadmissible ones.
pub fn heteroclinic_ode_defect(t: f64, m: f64, s1: Sign, s2: Sign, s3: Sign) -> f64 {
    let (s1, s2, s3) = (s1.value(), s2.value(), s3.value());
    let m2 = m * m;
    let sech = 1.0 / (m * t).cosh();
    let tanh = (m * t).tanh();
    let mu = PhaseState([s1 * m * sech, s2 * m * tanh, s3 * m * sech, 0.0, 0.0]);
    let vel = [-s1 * m2 * sech * tanh, s2 * m2 * sech * sech, -s3 * m2 * sech * tanh];
    let rhs = transformed_rhs_unchecked(&mu, 0.0);
    (0..3).map(|i| (vel[i] - rhs[i]).abs()).fold(0.0, f64::max)
}

/// Action-angle chart of the oscillator pair: (I, θ) ↦ (√(2I) cos θ, √(2I) sin θ).
pub fn action_angle_to_cart(action: f64, theta: f64) -> Result<[f64; 2]> {
    if !(action.is_finite() && theta.is_finite()) {
        return Err(Error::NonFinite { context: "action_angle_to_cart" });
    }
    if action < 0.0 {
        return Err(Error::Domain(format!("action I = {action} must be non-negative")));
    }
    let r = (2.0 * action).sqrt();
    Ok([r * theta.cos(), r * theta.sin()])
}

/// Result of the inverse action-angle map; the angle is undefined at the
/// coordinate singularity u = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAngle {
    pub action: f64,
    /// In [0, 2π); `None` exactly at the origin.
    pub angle: Option<f64>,
}

/// (u₁, u₂) ↦ (I, θ) with I = (u₁² + u₂²)/2 and θ = atan2(u₂, u₁) ∈ [0, 2π).
pub fn cart_to_action_angle(u1: f64, u2: f64) -> ActionAngle {
    let action = 0.5 * (u1 * u1 + u2 * u2);
    if u1 == 0.0 && u2 == 0.0 {
        return ActionAngle { action: 0.0, angle: None };
    }
    ActionAngle { action, angle: Some(wrap_angle(u2.atan2(u1))) }
}

/// Reduces an angle to [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can return TAU when theta is a tiny negative number.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Parameters of one Melnikov configuration: Casimir radius M, action level
/// k (= l⁰), and initial oscillator phase θ⁰. The derived constants are
/// h̃ = M² (heteroclinic energy), h = M² + k, Ω = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelnikovSetup {
    m: f64,
    k: f64,
    theta0: f64,
}

impl MelnikovSetup {
    /// Requires M > 0 and k ≥ 0 (k = 0 is the degenerate profile).
    pub fn new(m: f64, k: f64, theta0: f64) -> Result<Self> {
        if !(m.is_finite() && k.is_finite() && theta0.is_finite()) {
            return Err(Error::NonFinite { context: "MelnikovSetup" });
        }
        if m <= 0.0 {
            return Err(Error::Domain(format!("Casimir radius M = {m} must be positive")));
        }
        if k < 0.0 {
            return Err(Error::Domain(format!("action level k = {k} must be non-negative")));
        }
        Ok(MelnikovSetup { m, k, theta0 })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn with_theta0(&self, theta0: f64) -> Result<Self> {
        MelnikovSetup::new(self.m, self.k, theta0)
    }

    /// Heteroclinic energy h̃ = F(μ̃) = M².
    pub fn h_tilde(&self) -> f64 {
        self.m * self.m
    }

    /// Total energy level h = M² + k.
    pub fn h(&self) -> f64 {
        self.m * self.m + self.k
    }

    /// Action level l⁰ = G⁻¹(h − h̃) = k (G is the identity).
    pub fn action_level(&self) -> f64 {
        self.k
    }

    /// Oscillator frequency Ω = ∂G/∂I = 1.
    pub fn omega(&self) -> f64 {
        1.0
    }

    /// A branch with this setup's radius.
    pub fn branch(&self, s1: Sign, s2: Sign, s3: Sign) -> Result<HeteroclinicBranch> {
        HeteroclinicBranch::try_new(s1, s2, s3, self.m)
    }
}

/// The unperturbed orbit of the full system at time t:
/// μ from the heteroclinic branch, I = k, θ = t + θ⁰, returned in (μ, u)
/// coordinates.
pub fn unperturbed_orbit(
    t: f64,
    s: &MelnikovSetup,
    b: &HeteroclinicBranch,
) -> Result<PhaseState> {
    if b.m() != s.m() {
        return Err(Error::Domain(format!(
            "branch radius M = {} does not match setup M = {}",
            b.m(),
            s.m()
        )));
    }
    let mu = heteroclinic(t, b);
    let u = action_angle_to_cart(s.k, t + s.theta0)?;
    Ok(PhaseState::from_blocks(mu, u))
}

/// The two unstable critical points (0, ±M, 0) of the unperturbed
/// μ-subsystem (u = 0 by convention; the R² factor decouples at ε = 0).
pub fn saddle_points(m: f64) -> Result<(PhaseState, PhaseState)> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("Casimir radius M = {m} must be positive")));
    }
    Ok((
        PhaseState([0.0, m, 0.0, 0.0, 0.0]),
        PhaseState([0.0, -m, 0.0, 0.0, 0.0]),
    ))
}

/// Jacobian of the ε = 0 μ-subsystem at a point; used to confirm the
/// saddle eigenstructure {+M, −M, 0}.
pub fn mu_jacobian(mu: [f64; 3]) -> [[f64; 3]; 3] {
    let [m1, m2, m3] = mu;
    [[0.0, -m3, -m2], [m3, 0.0, m1], [-m2, -m1, 0.0]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn branch_admissibility() {
        use Sign::{Minus as N, Plus as P};
        assert!(HeteroclinicBranch::try_new(P, P, P, 1.0).is_ok());
        assert!(HeteroclinicBranch::try_new(P, N, N, 1.0).is_ok());
        assert!(HeteroclinicBranch::try_new(N, P, N, 1.0).is_ok());
        assert!(HeteroclinicBranch::try_new(N, N, P, 1.0).is_ok());
        for (s1, s2, s3) in HeteroclinicBranch::inadmissible_triples() {
            assert!(HeteroclinicBranch::try_new(s1, s2, s3, 1.0).is_err());
        }
        assert!(HeteroclinicBranch::plus(0.0).is_err());
        assert!(HeteroclinicBranch::plus(-1.0).is_err());
    }

    #[test]
    fn branch_from_str() {
        let b: HeteroclinicBranch = "+--".parse().unwrap();
        assert_eq!(b.label(), "+--");
        assert!("++-".parse::<HeteroclinicBranch>().is_err());
        assert!("+*".parse::<HeteroclinicBranch>().is_err());
    }

    #[test]
    fn heteroclinic_at_zero_and_limits() {
        let b = HeteroclinicBranch::plus(2.0).unwrap();
        let mu0 = heteroclinic(0.0, &b);
        assert_eq!(mu0, [2.0, 0.0, 2.0]);
        let far = heteroclinic(40.0, &b);
        assert!(far[0].abs() < 1e-12 && far[2].abs() < 1e-12);
        assert!((far[1] - 2.0).abs() < 1e-12);
        let back = heteroclinic(-40.0, &b);
        assert!((back[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn heteroclinic_solves_unperturbed_equations() {
        let b = HeteroclinicBranch::plus(1.0).unwrap();
        for t in [-2.0, -1.0, 0.0, 1.0, 3.0] {
            let (s1, s2, s3) = b.signs();
            let d = heteroclinic_ode_defect(t, 1.0, s1, s2, s3);
            assert!(d < 1e-14, "t = {t}: defect {d}");
        }
    }

    #[test]
    fn inadmissible_triples_fail_the_ode() {
        for (s1, s2, s3) in HeteroclinicBranch::inadmissible_triples() {
            let worst = (-20..=20)
                .map(|i| heteroclinic_ode_defect(i as f64 * 0.1, 1.0, s1, s2, s3))
                .fold(0.0, f64::max);
            assert!(worst > 0.1, "triple ({s1},{s2},{s3}) defect {worst}");
        }
    }

    #[test]
    fn cylinder_confinement_is_exact() {
        let b = HeteroclinicBranch::plus(1.5).unwrap();
        for i in -40..=40 {
            let t = i as f64 * 0.25;
            let mu = heteroclinic(t, &b);
            let c = mu[0] * mu[0] + mu[1] * mu[1];
            assert!((c - 2.25).abs() < 1e-14, "t = {t}: C = {c}");
        }
    }

    #[test]
    fn action_angle_round_trip_examples() {
        assert_eq!(action_angle_to_cart(0.5, 0.0).unwrap(), [1.0, 0.0]);
        let aa = cart_to_action_angle(0.0, 3.0);
        assert_eq!(aa.action, 4.5);
        assert!((aa.angle.unwrap() - FRAC_PI_2).abs() < 1e-15);
        let origin = cart_to_action_angle(0.0, 0.0);
        assert_eq!(origin.action, 0.0);
        assert!(origin.angle.is_none());
        assert!(action_angle_to_cart(-0.5, 0.0).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        for t in [-7.0, -PI, -1e-18, 0.0, 1.0, 6.2831, 100.0] {
            let w = wrap_angle(t);
            assert!((0.0..TAU).contains(&w), "wrap({t}) = {w}");
        }
        assert!((wrap_angle(-FRAC_PI_2) - 3.0 * FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn setup_validation_and_constants() {
        assert!(MelnikovSetup::new(0.0, 0.5, 0.0).is_err());
        assert!(MelnikovSetup::new(1.0, -0.5, 0.0).is_err());
        let s = MelnikovSetup::new(2.0, 0.5, 0.1).unwrap();
        assert_eq!(s.h_tilde(), 4.0);
        assert_eq!(s.h(), 4.5);
        assert_eq!(s.action_level(), 0.5);
        assert_eq!(s.omega(), 1.0);
    }

    #[test]
    fn unperturbed_orbit_energy_and_phase() {
        let s = MelnikovSetup::new(1.0, 0.5, 0.3).unwrap();
        let b = s.branch(Sign::Plus, Sign::Plus, Sign::Plus).unwrap();
        for i in -20..=20 {
            let t = i as f64 * 0.5;
            let p = unperturbed_orbit(t, &s, &b).unwrap();
            // F on the orbit is exactly M^2, I is exactly k.
            let f = 0.5 * (p[0] * p[0] + 2.0 * p[1] * p[1] + p[2] * p[2]);
            assert!((f - s.h_tilde()).abs() < 1e-14);
            let action = 0.5 * (p[3] * p[3] + p[4] * p[4]);
            assert!((action - s.k()).abs() < 1e-15);
            // Total unperturbed energy F + G = h, constant.
            assert!((f + action - s.h()).abs() < 1e-13);
        }
        // theta(0) = theta0.
        let p0 = unperturbed_orbit(0.0, &s, &b).unwrap();
        let aa = cart_to_action_angle(p0[3], p0[4]);
        assert!((aa.angle.unwrap() - 0.3).abs() < 1e-14);

        // Radius mismatch is rejected.
        let b2 = HeteroclinicBranch::plus(2.0).unwrap();
        assert!(unperturbed_orbit(0.0, &s, &b2).is_err());
    }

    #[test]
    fn saddles_and_linearization() {
        let (p, q) = saddle_points(1.0).unwrap();
        assert_eq!(p.0, [0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q.0, [0.0, -1.0, 0.0, 0.0, 0.0]);
        assert!(saddle_points(0.0).is_err());

        // The saddle zeroes the eps = 0 mu-equations.
        let v = transformed_rhs_unchecked(&p, 0.0);
        assert_eq!(v.0, [0.0; 5]);

        // Eigenstructure of the mu-linearization at (0, M, 0): {+M, -M, 0}.
        let m = 1.0;
        let a = mu_jacobian([0.0, m, 0.0]);
        let matvec = |v: [f64; 3]| {
            [
                a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
                a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
                a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
            ]
        };
        let unstable = matvec([1.0, 0.0, -1.0]);
        assert_eq!(unstable, [m, 0.0, -m]);
        let stable = matvec([1.0, 0.0, 1.0]);
        assert_eq!(stable, [-m, 0.0, -m]);
        let neutral = matvec([0.0, 1.0, 0.0]);
        assert_eq!(neutral, [0.0, 0.0, 0.0]);
    }
}
