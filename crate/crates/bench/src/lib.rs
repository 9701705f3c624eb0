//! Shared fixtures for the criterion benchmarks.

use lorenz5::analytic::{HeteroclinicBranch, MelnikovSetup};
use lorenz5::diagnostics::separatrix_seed;
use lorenz5::PhaseState;

/// The reference configuration used throughout: M = 1, k = 0.5, θ⁰ = 0,
/// branch (+,+,+).
pub fn standard_setup() -> (MelnikovSetup, HeteroclinicBranch) {
    let s = MelnikovSetup::new(1.0, 0.5, 0.0).expect("valid reference setup");
    let b = HeteroclinicBranch::plus(1.0).expect("valid reference branch");
    (s, b)
}

/// Near-separatrix seed for the reference configuration.
pub fn standard_seed() -> PhaseState {
    let (s, b) = standard_setup();
    separatrix_seed(&s, &b).expect("valid seed")
}
