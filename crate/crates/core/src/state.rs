use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase-space dimension of the five-component model.
pub const DIM: usize = 5;

/// Which coordinate chart a state lives in.
///
/// `X` is the original chart (x1..x5, with x4/x5 the fast gravity-wave pair);
/// `MuU` is the se*(2) x R^2 chart (mu1, mu2, mu3, u1, u2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    X,
    MuU,
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::X => write!(f, "x"),
            Chart::MuU => write!(f, "mu"),
        }
    }
}

/// A point of the five-dimensional phase space, chart-agnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState(pub [f64; DIM]);

impl PhaseState {
    pub fn new(c: [f64; DIM]) -> Self {
        PhaseState(c)
    }

    pub fn zeros() -> Self {
        PhaseState([0.0; DIM])
    }

    /// Validates that every component is finite.
    pub fn checked(c: [f64; DIM], context: &'static str) -> Result<Self> {
        if c.iter().all(|v| v.is_finite()) {
            Ok(PhaseState(c))
        } else {
            Err(Error::NonFinite { context })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// (mu1, mu2, mu3) block in the mu/u chart.
    pub fn mu(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    /// (u1, u2) block in the mu/u chart.
    pub fn u(&self) -> [f64; 2] {
        [self.0[3], self.0[4]]
    }

    pub fn from_blocks(mu: [f64; 3], u: [f64; 2]) -> Self {
        PhaseState([mu[0], mu[1], mu[2], u[0], u[1]])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn dist(&self, other: &PhaseState) -> f64 {
        (*self - *other).norm()
    }
}

impl Index<usize> for PhaseState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for PhaseState {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for PhaseState {
    type Output = PhaseState;
    fn add(self, rhs: PhaseState) -> PhaseState {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(&rhs.0) {
            *o += r;
        }
        PhaseState(out)
    }
}

impl Sub for PhaseState {
    type Output = PhaseState;
    fn sub(self, rhs: PhaseState) -> PhaseState {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(&rhs.0) {
            *o -= r;
        }
        PhaseState(out)
    }
}

impl Mul<f64> for PhaseState {
    type Output = PhaseState;
    fn mul(self, s: f64) -> PhaseState {
        let mut out = self.0;
        for v in &mut out {
            *v *= s;
        }
        PhaseState(out)
    }
}
