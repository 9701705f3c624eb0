//! Five-component Rossby/gravity-wave model (the Lorenz 1986 truncation of
//! the primitive equations) together with its Poisson geometry and the
//! numerical machinery to probe its chaotic layer:
//!
//! - [`geometry`]: structure matrices of the two Poisson brackets, bracket
//!   evaluation, Jacobi/Casimir verification, Hamiltonian vector fields;
//! - [`models`]: the vector fields in both charts, the Hamiltonians H and
//!   H^ε, and the linear Poisson chart change Φ;
//! - [`analytic`]: saddle points, heteroclinic orbits on the coadjoint
//!   cylinder, action-angle variables;
//! - [`melnikov`]: the Melnikov integral, its closed form
//!   −π√(2k) sech(π/2M) cos θ⁰, and simple-zero location;
//! - [`numerics`]: RK4 / Dormand–Prince 5(4) integration, Gauss–Kronrod
//!   quadrature, event refinement;
//! - [`diagnostics`]: energy-drift (first-order Melnikov) experiments,
//!   Poincaré sections, Benettin Lyapunov estimates, parameter sweeps;
//! - [`verify`]: seeded randomized verification of the structural claims.

pub mod analytic;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod melnikov;
pub mod models;
pub mod numerics;
pub mod state;
pub mod verify;

pub use analytic::{HeteroclinicBranch, MelnikovSetup, Sign};
pub use error::{Error, Result};
pub use geometry::{PoissonStructure, ScalarField};
pub use models::ModelParams;
pub use numerics::{IntegrationStatus, IntegratorConfig, Method, Trajectory};
pub use state::{Chart, PhaseState, DIM};
