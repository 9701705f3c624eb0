//! `lorenz5` — command-line front end for the five-component model:
//! structural verification, simulation, Melnikov profiles, energy-drift
//! experiments, Lyapunov estimates, Poincaré sections and parameter sweeps.
//!
//! Exit codes: 0 = all checks passed, 1 = a numerical check failed,
//! 2 = usage/configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "lorenz5", version, about = "Five-component Rossby/gravity-wave model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; unset flags fall back to the config
/// file (same key names) and then to per-command defaults.
#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// Coupling strength ε
    #[arg(long)]
    eps: Option<f64>,
    /// Casimir radius M (> 0)
    #[arg(long = "M")]
    m: Option<f64>,
    /// Action level k (≥ 0)
    #[arg(long)]
    k: Option<f64>,
    /// Initial oscillator phase θ⁰
    #[arg(long)]
    theta0: Option<f64>,
    /// Heteroclinic branch signs: one of +++, +--, -+-, --+
    #[arg(long, allow_hyphen_values = true)]
    branch: Option<String>,
    /// Half-window / truncation time T
    #[arg(long = "T")]
    t: Option<f64>,
    /// Adaptive relative tolerance
    #[arg(long)]
    rtol: Option<f64>,
    /// Adaptive absolute tolerance
    #[arg(long)]
    atol: Option<f64>,
    /// Integrator: dp54 (adaptive) or rk4 (fixed step)
    #[arg(long)]
    method: Option<String>,
    /// Fixed step size for --method rk4
    #[arg(long)]
    step: Option<f64>,
    /// Phase grid start:stop:count (inclusive linspace)
    #[arg(long)]
    grid: Option<String>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// RNG seed for randomized suites
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key = value config file; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the structural verification suites (antisymmetry, Jacobi,
    /// Casimir, pushforward, Hamiltonian consistency)
    Verify {
        #[command(flatten)]
        common: Common,
        /// Negative control: verify a sign-flipped copy of the first bracket
        #[arg(long, default_value_t = false)]
        inject_fault: bool,
    },
    /// Integrate the model and record the trajectory with tracked invariants
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Chart: mu (se*(2) x R^2) or x (original)
        #[arg(long)]
        chart: Option<String>,
        /// Initial state "a,b,c,d,e" (defaults to the separatrix seed)
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        /// Compare against the closed-form unperturbed orbit (needs eps = 0,
        /// mu chart, default seed)
        #[arg(long, default_value_t = false)]
        compare: bool,
    },
    /// Melnikov profile over θ⁰: numeric quadrature vs closed form, zeros
    Melnikov {
        #[command(flatten)]
        common: Common,
        /// Number of θ⁰ grid points on [0, 2π)
        #[arg(long)]
        points: Option<usize>,
    },
    /// Energy-drift experiment: ΔF/ε over a phase grid vs the prediction
    Deltaf {
        #[command(flatten)]
        common: Common,
        /// Number of θ⁰ phases on [0, 2π)
        #[arg(long)]
        phases: Option<usize>,
    },
    /// Largest Lyapunov exponent (Benettin two-trajectory method)
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        total_time: Option<f64>,
        /// Renormalization interval
        #[arg(long)]
        renorm: Option<f64>,
        /// Initial separation δ₀
        #[arg(long)]
        delta0: Option<f64>,
        /// Seed state: separatrix or regular
        #[arg(long)]
        seed_kind: Option<String>,
        /// Explicit seed state "a,b,c,d,e" (overrides --seed-kind)
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Poincaré section θ = θ* (increasing θ): crossings with F and Casimir
    Poincare {
        #[command(flatten)]
        common: Common,
        /// Section phase θ*
        #[arg(long)]
        theta_star: Option<f64>,
        /// Number of crossings to collect
        #[arg(long)]
        crossings: Option<usize>,
        /// Seed state: separatrix or regular
        #[arg(long)]
        seed_kind: Option<String>,
        /// Explicit seed state "a,b,c,d,e" (overrides --seed-kind)
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Evaluate a diagnostic over a Cartesian parameter grid
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Cell diagnostic: melnikov, deltaf, lyapunov or params
        #[arg(long)]
        task: Option<String>,
        /// ε grid start:stop:count
        #[arg(long)]
        grid_eps: Option<String>,
        /// M grid start:stop:count
        #[arg(long)]
        grid_m: Option<String>,
        /// k grid start:stop:count
        #[arg(long)]
        grid_k: Option<String>,
        /// θ⁰ grid start:stop:count
        #[arg(long)]
        grid_theta0: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
