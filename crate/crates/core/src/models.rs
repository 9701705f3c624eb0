//! The concrete model: the five-component vector field in both charts, the
//! Hamiltonians H and H^ε, the linear chart change Φ, and the named scalar
//! quantities (energies, Casimir, coupling) as [`ScalarField`]s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::state::{Chart, PhaseState};

/// Model parameters: the Rossby-number-like coupling ε and the chart the
/// state is expressed in.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps: f64,
    pub chart: Chart,
}

impl ModelParams {
    pub fn new(eps: f64, chart: Chart) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::NonFinite { context: "ModelParams::eps" });
        }
        Ok(ModelParams { eps, chart })
    }

    /// Right-hand side for this chart.
    pub fn rhs(&self, p: &PhaseState) -> PhaseState {
        match self.chart {
            Chart::X => lorenz5_rhs_unchecked(p, self.eps),
            Chart::MuU => transformed_rhs_unchecked(p, self.eps),
        }
    }

    /// Energy function for this chart (H in the x chart, H^ε in μ/u).
    pub fn energy(&self, p: &PhaseState) -> f64 {
        match self.chart {
            Chart::X => hamiltonian_r5(p),
            Chart::MuU => hamiltonian_eps(p, self.eps),
        }
    }
}

/// Original five-component system:
/// ẋ₁ = −x₂x₃ + εx₂x₅, ẋ₂ = x₁x₃ − εx₁x₅, ẋ₃ = −x₁x₂,
/// ẋ₄ = −x₅, ẋ₅ = x₄ + εx₁x₂.
pub fn lorenz5_rhs(x: &PhaseState, eps: f64) -> Result<PhaseState> {
    validate(x, eps, "lorenz5_rhs")?;
    Ok(lorenz5_rhs_unchecked(x, eps))
}

/// Unvalidated hot-path version of [`lorenz5_rhs`].
#[inline]
pub fn lorenz5_rhs_unchecked(x: &PhaseState, eps: f64) -> PhaseState {
    let [x1, x2, x3, x4, x5] = x.0;
    PhaseState([
        -x2 * x3 + eps * x2 * x5,
        x1 * x3 - eps * x1 * x5,
        -x1 * x2,
        -x5,
        x4 + eps * x1 * x2,
    ])
}

/// The same system in the (μ, u) chart:
/// μ̇₁ = −μ₂μ₃ + εμ₂u₂ − ε²μ₂μ₃, μ̇₂ = μ₁μ₃ − εμ₁u₂ + ε²μ₁μ₃,
/// μ̇₃ = −μ₁μ₂, u̇₁ = −u₂ + εμ₃, u̇₂ = u₁.
pub fn transformed_rhs(p: &PhaseState, eps: f64) -> Result<PhaseState> {
    validate(p, eps, "transformed_rhs")?;
    Ok(transformed_rhs_unchecked(p, eps))
}

/// Unvalidated hot-path version of [`transformed_rhs`].
#[inline]
pub fn transformed_rhs_unchecked(p: &PhaseState, eps: f64) -> PhaseState {
    let [m1, m2, m3, u1, u2] = p.0;
    let e2 = eps * eps;
    PhaseState([
        -m2 * m3 + eps * m2 * u2 - e2 * m2 * m3,
        m1 * m3 - eps * m1 * u2 + e2 * m1 * m3,
        -m1 * m2,
        -u2 + eps * m3,
        u1,
    ])
}

/// The Poisson chart change Φ(x) = (x₁, x₂, x₃, x₄, εx₃ + x₅).
pub fn phi(x: &PhaseState, eps: f64) -> Result<PhaseState> {
    validate(x, eps, "phi")?;
    Ok(PhaseState([x[0], x[1], x[2], x[3], eps * x[2] + x[4]]))
}

/// Inverse chart change Φ⁻¹(p) = (μ₁, μ₂, μ₃, u₁, u₂ − εμ₃).
pub fn phi_inv(p: &PhaseState, eps: f64) -> Result<PhaseState> {
    validate(p, eps, "phi_inv")?;
    Ok(PhaseState([p[0], p[1], p[2], p[3], p[4] - eps * p[2]]))
}

/// H = ½(x₁² + 2x₂² + x₃² + x₄² + x₅²).
pub fn hamiltonian_r5(x: &PhaseState) -> f64 {
    0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2] + x[3] * x[3] + x[4] * x[4])
}

/// H^ε = ½(μ₁² + 2μ₂² + μ₃² + u₁² + u₂² − 2εμ₃u₂ + ε²μ₃²).
pub fn hamiltonian_eps(p: &PhaseState, eps: f64) -> f64 {
    let [m1, m2, m3, u1, u2] = p.0;
    0.5 * (m1 * m1
        + 2.0 * m2 * m2
        + m3 * m3
        + u1 * u1
        + u2 * u2
        - 2.0 * eps * m3 * u2
        + eps * eps * m3 * m3)
}

/// The perturbation-split form of H^ε in action-angle variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitHamiltonian {
    /// F(μ) = ½(μ₁² + 2μ₂² + μ₃²), the slow (Rossby) energy.
    pub f: f64,
    /// G(I) = I, the oscillator energy.
    pub g: f64,
    /// H¹ = −μ₃√(2I) sin θ, the order-ε coupling.
    pub h1: f64,
    /// ½ε²μ₃², the order-ε² remainder (reported unscaled).
    pub remainder: f64,
}

impl SplitHamiltonian {
    /// F + G + εH¹ + remainder; equals H^ε at the corresponding (μ, u).
    pub fn total(&self, eps: f64) -> f64 {
        self.f + self.g + eps * self.h1 + self.remainder
    }
}

/// Splits H^ε = F + G + εH¹ + O(ε²) at a state given in action-angle form
/// (μ₁, μ₂, μ₃, I, θ).
pub fn split_hamiltonian(p_action_angle: &PhaseState, eps: f64) -> Result<SplitHamiltonian> {
    validate(p_action_angle, eps, "split_hamiltonian")?;
    let [m1, m2, m3, action, theta] = p_action_angle.0;
    if action < 0.0 {
        return Err(Error::Domain(format!("action I = {action} must be non-negative")));
    }
    Ok(SplitHamiltonian {
        f: 0.5 * (m1 * m1 + 2.0 * m2 * m2 + m3 * m3),
        g: action,
        h1: -m3 * (2.0 * action).sqrt() * theta.sin(),
        remainder: 0.5 * eps * eps * m3 * m3,
    })
}

/// DΦ·f₁(x) − f₂(Φ(x)): the defect of Φ conjugating the original system to
/// the transformed one. Identically zero when Φ is the right chart change.
pub fn pushforward_residual(x: &PhaseState, eps: f64) -> Result<PhaseState> {
    validate(x, eps, "pushforward_residual")?;
    let f1 = lorenz5_rhs_unchecked(x, eps);
    // DΦ is the identity away from the last row (0, 0, ε, 0, 1).
    let pushed = PhaseState([f1[0], f1[1], f1[2], f1[3], eps * f1[2] + f1[4]]);
    let f2 = transformed_rhs_unchecked(&phi(x, eps)?, eps);
    Ok(pushed - f2)
}

/// H as a [`ScalarField`] with analytic gradient.
pub fn hamiltonian_r5_field() -> ScalarField {
    ScalarField::with_grad("H", hamiltonian_r5, |x| {
        [x[0], 2.0 * x[1], x[2], x[3], x[4]]
    })
}

/// H^ε as a [`ScalarField`] with analytic gradient.
pub fn hamiltonian_eps_field(eps: f64) -> ScalarField {
    ScalarField::with_grad(
        "H_eps",
        move |p| hamiltonian_eps(p, eps),
        move |p| {
            [
                p[0],
                2.0 * p[1],
                p[2] - eps * p[4] + eps * eps * p[2],
                p[3],
                p[4] - eps * p[2],
            ]
        },
    )
}

/// The Casimir of the first two coordinates: x₁² + x₂² in the original chart,
/// μ₁² + μ₂² in the transformed one (the same polynomial in both).
pub fn casimir_field() -> ScalarField {
    ScalarField::with_grad(
        "C",
        |p| p[0] * p[0] + p[1] * p[1],
        |p| [2.0 * p[0], 2.0 * p[1], 0.0, 0.0, 0.0],
    )
}

/// F(μ) = ½(μ₁² + 2μ₂² + μ₃²): the slow-wave energy on se*(2).
pub fn rossby_energy_field() -> ScalarField {
    ScalarField::with_grad(
        "F",
        |p| 0.5 * (p[0] * p[0] + 2.0 * p[1] * p[1] + p[2] * p[2]),
        |p| [p[0], 2.0 * p[1], p[2], 0.0, 0.0],
    )
}

/// H¹ expressed in the (μ, u) chart: −μ₃u₂ (= −μ₃√(2I) sin θ).
pub fn wave_coupling_field() -> ScalarField {
    ScalarField::with_grad(
        "H1",
        |p| -p[2] * p[4],
        |p| [0.0, 0.0, -p[4], 0.0, -p[2]],
    )
}

/// Oscillator action I = (u₁² + u₂²)/2.
pub fn action_field() -> ScalarField {
    ScalarField::with_grad(
        "I",
        |p| 0.5 * (p[3] * p[3] + p[4] * p[4]),
        |p| [0.0, 0.0, 0.0, p[3], p[4]],
    )
}

fn validate(p: &PhaseState, eps: f64, context: &'static str) -> Result<()> {
    if !p.is_finite() || !eps.is_finite() {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}
