//! Shared numerical engines: time integration with conserved-quantity
//! tracking, adaptive quadrature for improper integrals, and event
//! (section-crossing) refinement.

pub mod ode;
pub mod quad;

pub use ode::{
    integrate, propagate, refine_crossing, rk4_step, IntegrationStatus, IntegratorConfig, Method,
    TrackedSeries, Trajectory,
};
pub use quad::{quad_adaptive, quad_improper, QuadResult};
