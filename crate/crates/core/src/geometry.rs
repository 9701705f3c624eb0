//! Poisson structures for both charts of the five-component model and the
//! machinery to verify them: bracket evaluation, Jacobi residuals, Casimir
//! residuals and Hamiltonian vector fields.
//!
//! Conventions: {f,g} = ∇fᵀ J ∇g with J_ij = {coordinate_i, coordinate_j},
//! so a Hamiltonian vector field is J∇H.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::{PhaseState, DIM};

/// 5×5 structure matrix.
pub type Matrix5 = [[f64; DIM]; DIM];

type EvalFn = Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&PhaseState) -> [f64; DIM] + Send + Sync>;

/// A smooth function on phase space, with an optional analytic gradient.
///
/// When no analytic gradient is supplied, [`ScalarField::gradient`] falls
/// back to central finite differences with step h = ∛ε_mach · max(1, |p_i|).
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    eval: EvalFn,
    grad: Option<GradFn>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("analytic_grad", &self.grad.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarField { name: name.into(), eval: Arc::new(eval), grad: None }
    }

    pub fn with_grad(
        name: impl Into<String>,
        eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&PhaseState) -> [f64; DIM] + Send + Sync + 'static,
    ) -> Self {
        ScalarField { name: name.into(), eval: Arc::new(eval), grad: Some(Arc::new(grad)) }
    }

    /// The coordinate function p ↦ p_i, with exact gradient e_i.
    pub fn coordinate(i: usize) -> Result<Self> {
        if i >= DIM {
            return Err(Error::IndexOutOfRange(i, DIM));
        }
        Ok(ScalarField::with_grad(format!("coord_{i}"), move |p| p[i], move |_| {
            let mut g = [0.0; DIM];
            g[i] = 1.0;
            g
        }))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::with_grad(format!("const_{c}"), move |_| c, |_| [0.0; DIM])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: &PhaseState) -> f64 {
        (self.eval)(p)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Analytic gradient if available, otherwise central finite differences.
    pub fn gradient(&self, p: &PhaseState) -> [f64; DIM] {
        match &self.grad {
            Some(g) => g(p),
            None => self.fd_gradient(p),
        }
    }

    /// Analytic gradient or an error; never falls back.
    pub fn gradient_strict(&self, p: &PhaseState) -> Result<[f64; DIM]> {
        match &self.grad {
            Some(g) => Ok(g(p)),
            None => Err(Error::GradientUnavailable(self.name.clone())),
        }
    }

    /// Central-difference gradient with per-component step
    /// h_i = ∛ε_mach · max(1, |p_i|).
    pub fn fd_gradient(&self, p: &PhaseState) -> [f64; DIM] {
        let h0 = f64::EPSILON.cbrt();
        let mut g = [0.0; DIM];
        for i in 0..DIM {
            let h = h0 * p[i].abs().max(1.0);
            let mut hi = *p;
            let mut lo = *p;
            hi[i] += h;
            lo[i] -= h;
            // Recompute the actually-realized step to kill representation error.
            let dh = hi[i] - lo[i];
            g[i] = ((self.eval)(&hi) - (self.eval)(&lo)) / dh;
        }
        g
    }
}

/// Structure matrix of the original chart's bracket {·,·}₁.
///
/// Nonzero entries (1-based paper indices): J₂₃ = x₁, J₁₃ = −x₂,
/// J₂₅ = −εx₁, J₁₅ = εx₂, J₅₄ = 1, plus the antisymmetric completion.
pub fn structure_matrix_r5(x: &PhaseState, eps: f64) -> Result<Matrix5> {
    if !x.is_finite() || !eps.is_finite() {
        return Err(Error::NonFinite { context: "structure_matrix_r5" });
    }
    Ok(r5_matrix_raw(x, eps))
}

fn r5_matrix_raw(x: &PhaseState, eps: f64) -> Matrix5 {
    let (x1, x2) = (x[0], x[1]);
    let mut j = [[0.0; DIM]; DIM];
    j[0][2] = -x2;
    j[2][0] = x2;
    j[1][2] = x1;
    j[2][1] = -x1;
    j[0][4] = eps * x2;
    j[4][0] = -(eps * x2);
    j[1][4] = -(eps * x1);
    j[4][1] = eps * x1;
    j[4][3] = 1.0;
    j[3][4] = -1.0;
    j
}

/// ∂J_ij/∂x_l for the {·,·}₁ matrix; entries are degree ≤ 1 polynomials,
/// so the derivative is constant in x.
fn r5_entry_grad(i: usize, j: usize, eps: f64) -> [f64; DIM] {
    let mut g = [0.0; DIM];
    match (i, j) {
        (0, 2) => g[1] = -1.0,
        (2, 0) => g[1] = 1.0,
        (1, 2) => g[0] = 1.0,
        (2, 1) => g[0] = -1.0,
        (0, 4) => g[1] = eps,
        (4, 0) => g[1] = -eps,
        (1, 4) => g[0] = -eps,
        (4, 1) => g[0] = eps,
        _ => {}
    }
    g
}

/// Structure matrix of the product bracket {·,·}₂ on se*(2) × R².
///
/// μ-block is the se*(2) Lie-Poisson structure ({μ₂,μ₃} = μ₁,
/// {μ₁,μ₃} = −μ₂), u-block the standard symplectic one ({u₂,u₁} = 1).
pub fn structure_matrix_se2r2(p: &PhaseState) -> Result<Matrix5> {
    if !p.is_finite() {
        return Err(Error::NonFinite { context: "structure_matrix_se2r2" });
    }
    Ok(se2r2_matrix_raw(p, 0.0))
}

fn se2r2_matrix_raw(p: &PhaseState, _eps: f64) -> Matrix5 {
    let (m1, m2) = (p[0], p[1]);
    let mut j = [[0.0; DIM]; DIM];
    j[1][2] = m1;
    j[2][1] = -m1;
    j[0][2] = -m2;
    j[2][0] = m2;
    j[4][3] = 1.0;
    j[3][4] = -1.0;
    j
}

fn se2r2_entry_grad(i: usize, j: usize, _eps: f64) -> [f64; DIM] {
    let mut g = [0.0; DIM];
    match (i, j) {
        (1, 2) => g[0] = 1.0,
        (2, 1) => g[0] = -1.0,
        (0, 2) => g[1] = -1.0,
        (2, 0) => g[1] = 1.0,
        _ => {}
    }
    g
}

/// One of the model's Poisson structures, as a point → matrix map together
/// with analytic entry derivatives (used by the Jacobi check).
#[derive(Clone, Copy)]
pub struct PoissonStructure {
    label: &'static str,
    matrix_fn: fn(&PhaseState, f64) -> Matrix5,
    entry_grad_fn: fn(usize, usize, f64) -> [f64; DIM],
}

impl std::fmt::Debug for PoissonStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PoissonStructure({})", self.label)
    }
}

impl PoissonStructure {
    /// {·,·}₁ on R⁵ (original chart). The coupling ε is supplied per call.
    pub fn r5() -> Self {
        PoissonStructure { label: "r5", matrix_fn: r5_matrix_raw, entry_grad_fn: r5_entry_grad }
    }

    /// {·,·}₂ on se*(2) × R². Ignores ε.
    pub fn se2_r2() -> Self {
        PoissonStructure {
            label: "se2xr2",
            matrix_fn: se2r2_matrix_raw,
            entry_grad_fn: se2r2_entry_grad,
        }
    }

    /// A deliberately broken copy of {·,·}₁ with the (x₂,x₃) entry pair
    /// negated. Still antisymmetric, but fails Jacobi (for ε ≠ 0) and the
    /// vector-field consistency check. Used as a negative control.
    pub fn r5_faulted() -> Self {
        PoissonStructure {
            label: "r5-faulted",
            matrix_fn: |x, eps| {
                let mut j = r5_matrix_raw(x, eps);
                j[1][2] = -j[1][2];
                j[2][1] = -j[2][1];
                j
            },
            entry_grad_fn: |i, j, eps| {
                let mut g = r5_entry_grad(i, j, eps);
                if (i, j) == (1, 2) || (i, j) == (2, 1) {
                    for v in &mut g {
                        *v = -*v;
                    }
                }
                g
            },
        }
    }

    pub fn label(&self) -> &'static str {
        self.label
    }

    pub fn dim(&self) -> usize {
        DIM
    }

    pub fn matrix(&self, p: &PhaseState, eps: f64) -> Result<Matrix5> {
        if !p.is_finite() || !eps.is_finite() {
            return Err(Error::NonFinite { context: "PoissonStructure::matrix" });
        }
        Ok((self.matrix_fn)(p, eps))
    }

    /// Gradient of the entry J_ij with respect to the coordinates
    /// (constant: all entries are degree ≤ 1).
    pub fn entry_grad(&self, i: usize, j: usize, eps: f64) -> [f64; DIM] {
        (self.entry_grad_fn)(i, j, eps)
    }
}

/// {f,g} = ∇fᵀ J(p) ∇g, with finite-difference fallback for gradients.
pub fn bracket(
    s: &PoissonStructure,
    f: &ScalarField,
    g: &ScalarField,
    p: &PhaseState,
    eps: f64,
) -> Result<f64> {
    bracket_with(s, f, g, p, eps, true)
}

/// Bracket evaluation with the finite-difference fallback under caller
/// control; `allow_fd = false` turns a missing analytic gradient into a
/// configuration error.
pub fn bracket_with(
    s: &PoissonStructure,
    f: &ScalarField,
    g: &ScalarField,
    p: &PhaseState,
    eps: f64,
    allow_fd: bool,
) -> Result<f64> {
    let j = s.matrix(p, eps)?;
    let (gf, gg) = if allow_fd {
        (f.gradient(p), g.gradient(p))
    } else {
        (f.gradient_strict(p)?, g.gradient_strict(p)?)
    };
    let mut acc = 0.0;
    for i in 0..DIM {
        if gf[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for l in 0..DIM {
            row += j[i][l] * gg[l];
        }
        acc += gf[i] * row;
    }
    Ok(acc)
}

/// Jacobi-identity residual {{x_i,x_j},x_k} + cyclic, evaluated through the
/// structure-matrix identity Σ_l (J_il ∂_l J_jk + J_jl ∂_l J_ki + J_kl ∂_l J_ij)
/// with analytic entry derivatives. Zero for a genuine Poisson structure.
pub fn jacobi_residual(
    s: &PoissonStructure,
    p: &PhaseState,
    triple: (usize, usize, usize),
    eps: f64,
) -> Result<f64> {
    let (i, j, k) = triple;
    for idx in [i, j, k] {
        if idx >= DIM {
            return Err(Error::IndexOutOfRange(idx, DIM));
        }
    }
    if i == j || j == k || i == k {
        return Err(Error::RepeatedIndex(i, j, k));
    }
    let m = s.matrix(p, eps)?;
    let d_jk = s.entry_grad(j, k, eps);
    let d_ki = s.entry_grad(k, i, eps);
    let d_ij = s.entry_grad(i, j, eps);
    let mut acc = 0.0;
    for l in 0..DIM {
        acc += m[i][l] * d_jk[l] + m[j][l] * d_ki[l] + m[k][l] * d_ij[l];
    }
    Ok(acc)
}

/// J(p)∇C(p); the zero vector iff C is a Casimir at p.
pub fn casimir_residual(
    s: &PoissonStructure,
    c: &ScalarField,
    p: &PhaseState,
    eps: f64,
) -> Result<[f64; DIM]> {
    hamiltonian_vector_field(s, c, p, eps)
}

/// The Hamiltonian vector field J(p)∇H(p).
pub fn hamiltonian_vector_field(
    s: &PoissonStructure,
    h: &ScalarField,
    p: &PhaseState,
    eps: f64,
) -> Result<[f64; DIM]> {
    let j = s.matrix(p, eps)?;
    let grad = h.gradient(p);
    let mut out = [0.0; DIM];
    for i in 0..DIM {
        let mut acc = 0.0;
        for l in 0..DIM {
            acc += j[i][l] * grad[l];
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Max-norm of J + Jᵀ; exactly 0 for both model structures.
pub fn antisymmetry_defect(j: &Matrix5) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in j.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            worst = worst.max((v + j[l][i]).abs());
        }
    }
    worst
}

/// All C(5,3) = 10 unordered coordinate triples.
pub fn coordinate_triples() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(10);
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            for k in (j + 1)..DIM {
                out.push((i, j, k));
            }
        }
    }
    out
}
