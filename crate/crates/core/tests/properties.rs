//! Cross-module invariants: randomized property tests (proptest) for the
//! algebraic identities, plus deterministic checks that tie the bracket
//! formulation, the closed forms and the integrators together.

use std::f64::consts::TAU;

use proptest::prelude::*;

use lorenz5::analytic::{
    action_angle_to_cart, cart_to_action_angle, heteroclinic, heteroclinic_ode_defect,
    unperturbed_orbit, HeteroclinicBranch, MelnikovSetup, Sign,
};
use lorenz5::diagnostics::{default_window, delta_f_experiment, fit_cosine, lyapunov_mle, separatrix_seed};
use lorenz5::geometry::{
    antisymmetry_defect, bracket, coordinate_triples, jacobi_residual, PoissonStructure,
};
use lorenz5::melnikov::{closed_amplitude, integrand, melnikov_numeric, QuadConfig};
use lorenz5::models;
use lorenz5::numerics::{integrate, propagate, IntegrationStatus, IntegratorConfig};
use lorenz5::PhaseState;

fn state_strategy() -> impl Strategy<Value = PhaseState> {
    prop::array::uniform5(-5.0f64..5.0).prop_map(PhaseState::new)
}

fn branch_strategy() -> impl Strategy<Value = (Sign, Sign, Sign)> {
    // s1 = s2*s3 enforced by construction.
    (prop::bool::ANY, prop::bool::ANY).prop_map(|(b2, b3)| {
        let s = |b: bool| if b { Sign::Plus } else { Sign::Minus };
        let s2 = s(b2);
        let s3 = s(b3);
        let s1 = s(b2 == b3);
        (s1, s2, s3)
    })
}

proptest! {
    #[test]
    fn prop_antisymmetry_exact(p in state_strategy(), eps in -1.0f64..1.0) {
        let j1 = PoissonStructure::r5().matrix(&p, eps).unwrap();
        let j2 = PoissonStructure::se2_r2().matrix(&p, 0.0).unwrap();
        prop_assert_eq!(antisymmetry_defect(&j1), 0.0);
        prop_assert_eq!(antisymmetry_defect(&j2), 0.0);
    }

    #[test]
    fn prop_jacobi_residual_vanishes(p in state_strategy(), eps in -1.0f64..1.0) {
        for s in [PoissonStructure::r5(), PoissonStructure::se2_r2()] {
            for trip in coordinate_triples() {
                let r = jacobi_residual(&s, &p, trip, eps).unwrap();
                prop_assert!(r.abs() < 1e-10, "triple {:?}: {r}", trip);
            }
        }
    }

    #[test]
    fn prop_pushforward_residual_vanishes(x in state_strategy(), eps in -1.0f64..1.0) {
        let r = models::pushforward_residual(&x, eps).unwrap();
        prop_assert!(r.max_abs() < 1e-12, "{:?}", r);
    }

    #[test]
    fn prop_phi_round_trip(x in state_strategy(), eps in -1.0f64..1.0) {
        let there = models::phi(&x, eps).unwrap();
        let back = models::phi_inv(&there, eps).unwrap();
        let scale = x.max_abs().max(there.max_abs()).max(1.0);
        prop_assert!((back - x).max_abs() <= 1e-15 * scale);
    }

    #[test]
    fn prop_energy_chart_invariance(x in state_strategy(), eps in -1.0f64..1.0) {
        let h = models::hamiltonian_r5(&x);
        let he = models::hamiltonian_eps(&models::phi(&x, eps).unwrap(), eps);
        prop_assert!((h - he).abs() < 1e-12 * h.max(1.0));
    }

    #[test]
    fn prop_split_hamiltonian_reconstruction(
        mu in prop::array::uniform3(-5.0f64..5.0),
        action in 0.0f64..5.0,
        theta in 0.0f64..TAU,
        eps in -1.0f64..1.0,
    ) {
        let p = PhaseState([mu[0], mu[1], mu[2], action, theta]);
        let split = models::split_hamiltonian(&p, eps).unwrap();
        let u = action_angle_to_cart(action, theta).unwrap();
        let direct = models::hamiltonian_eps(
            &PhaseState([mu[0], mu[1], mu[2], u[0], u[1]]), eps);
        prop_assert!(
            (split.total(eps) - direct).abs() < 1e-13 * direct.abs().max(1.0),
            "split {} direct {}", split.total(eps), direct
        );
    }

    #[test]
    fn prop_action_angle_round_trip(u1 in -5.0f64..5.0, u2 in -5.0f64..5.0) {
        prop_assume!(u1 * u1 + u2 * u2 > 1e-6);
        let aa = cart_to_action_angle(u1, u2);
        let back = action_angle_to_cart(aa.action, aa.angle.unwrap()).unwrap();
        let scale = (u1.abs() + u2.abs()).max(1.0);
        prop_assert!((back[0] - u1).abs() < 1e-14 * scale);
        prop_assert!((back[1] - u2).abs() < 1e-14 * scale);
    }

    #[test]
    fn prop_heteroclinic_exactness(
        t in -20.0f64..20.0,
        m in 0.2f64..3.0,
        signs in branch_strategy(),
    ) {
        let (s1, s2, s3) = signs;
        let defect = heteroclinic_ode_defect(t, m, s1, s2, s3);
        prop_assert!(defect < 1e-13, "defect {defect}");
        // Cylinder confinement is exact.
        let b = HeteroclinicBranch::try_new(s1, s2, s3, m).unwrap();
        let mu = heteroclinic(t, &b);
        let c = mu[0] * mu[0] + mu[1] * mu[1];
        prop_assert!((c - m * m).abs() < 1e-14 * (m * m).max(1.0));
    }

    #[test]
    fn prop_bracket_antisymmetric_arguments(p in state_strategy(), eps in -1.0f64..1.0) {
        let f = models::hamiltonian_eps_field(0.3);
        let g = models::rossby_energy_field();
        for s in [PoissonStructure::r5(), PoissonStructure::se2_r2()] {
            let fg = bracket(&s, &f, &g, &p, eps).unwrap();
            let gf = bracket(&s, &g, &f, &p, eps).unwrap();
            prop_assert!((fg + gf).abs() < 1e-11 * fg.abs().max(1.0));
        }
    }
}

#[test]
fn fd_gradient_matches_analytic_to_second_order() {
    // ScalarField invariant: central differences reproduce the analytic
    // gradient to O(h^2) with h ~ cbrt(eps_machine).
    let fields =
        [models::hamiltonian_eps_field(0.37), models::rossby_energy_field(), models::casimir_field()];
    let pts = [
        PhaseState([1.2, -0.8, 2.5, 0.4, -1.6]),
        PhaseState([-3.0, 0.1, 0.0, 4.2, 2.2]),
        PhaseState([0.0, 0.0, 0.0, 0.0, 0.0]),
    ];
    for f in &fields {
        for p in &pts {
            let a = f.gradient(p);
            let fd = f.fd_gradient(p);
            for i in 0..5 {
                assert!(
                    (a[i] - fd[i]).abs() < 1e-7,
                    "{} component {i}: {} vs {}",
                    f.name(),
                    a[i],
                    fd[i]
                );
            }
        }
    }
}

#[test]
fn bracket_route_equals_direct_integrand() {
    // {F, H1}_2 evaluated along the unperturbed orbit reproduces the
    // explicit integrand pointwise.
    let s2 = PoissonStructure::se2_r2();
    let f = models::rossby_energy_field();
    let h1 = models::wave_coupling_field();
    let setup = MelnikovSetup::new(1.0, 0.5, 0.0).unwrap();
    let branch = HeteroclinicBranch::plus(1.0).unwrap();
    let mut rng = 0x2545F4914F6CDD1Du64;
    let mut next = || {
        // xorshift: cheap deterministic stream for test points.
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..100 {
        let t = 20.0 * next() - 10.0;
        let th0 = TAU * next();
        let st = setup.with_theta0(th0).unwrap();
        let orbit = unperturbed_orbit(t, &st, &branch).unwrap();
        let via_bracket = bracket(&s2, &f, &h1, &orbit, 0.0).unwrap();
        let direct = integrand(t, &st, &branch);
        assert!(
            (via_bracket - direct).abs() < 1e-12,
            "t = {t}, theta0 = {th0}: {via_bracket} vs {direct}"
        );
    }
}

#[test]
fn melnikov_profile_is_purely_cosinusoidal() {
    // Least-squares fit of the numeric profile to A cos + B sin over 64
    // points: the sine coefficient is quadrature noise and the cosine
    // coefficient matches the closed amplitude.
    let s = MelnikovSetup::new(1.0, 0.5, 0.0).unwrap();
    let b = HeteroclinicBranch::plus(1.0).unwrap();
    let quad = QuadConfig::for_radius(1.0).unwrap();
    let thetas: Vec<f64> = (0..64).map(|i| i as f64 * TAU / 64.0).collect();
    let values: Vec<f64> = thetas
        .iter()
        .map(|&th| melnikov_numeric(&s.with_theta0(th).unwrap(), &b, &quad).unwrap().value)
        .collect();
    let (a, bb) = fit_cosine(&thetas, &values);
    assert!(bb.abs() < 1e-10, "B = {bb}");
    let amp = closed_amplitude(&s);
    assert!((a + amp).abs() < 1e-9, "A = {a} vs -{amp}");
}

#[test]
fn chart_equivalence_of_trajectories() {
    // Flowing Eq. (1) and mapping through Phi lands on the Eq. (2) flow
    // from Phi(x0), within integrator tolerance.
    let eps = 0.3;
    let x0 = PhaseState([1.0, 0.2, 0.5, 0.3, 0.4]);
    let cfg = IntegratorConfig::adaptive(1e-11, 1e-11);
    let rhs_x = |_t: f64, x: &PhaseState| models::lorenz5_rhs_unchecked(x, eps);
    let rhs_mu = |_t: f64, p: &PhaseState| models::transformed_rhs_unchecked(p, eps);
    let traj_x = integrate(rhs_x, &x0, (0.0, 10.0), &cfg, &[]).unwrap();
    let p0 = models::phi(&x0, eps).unwrap();
    for (i, t) in traj_x.times.iter().enumerate().step_by(50) {
        let (p_t, status) = propagate(rhs_mu, &p0, (0.0, *t), &cfg).unwrap();
        assert_eq!(status, IntegrationStatus::Complete);
        let mapped = models::phi(&traj_x.states[i], eps).unwrap();
        let d = mapped.dist(&p_t);
        assert!(d < 1e-7, "t = {t}: chart deviation {d}");
    }
}

#[test]
fn delta_f_error_shrinks_with_eps() {
    // |dF/eps - prediction| decreases from eps = 1e-2 to the smaller
    // couplings (windows chosen by the auto rule).
    let s = MelnikovSetup::new(1.0, 0.5, 0.0).unwrap();
    let b = HeteroclinicBranch::plus(1.0).unwrap();
    let cfg = IntegratorConfig::adaptive(1e-12, 1e-12);
    let mut errs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let window = default_window(eps, 1.0).unwrap();
        let r = delta_f_experiment(eps, &s, &b, window, &cfg).unwrap();
        assert_eq!(r.status, IntegrationStatus::Complete);
        errs.push((r.delta_f_over_eps - r.prediction).abs());
    }
    assert!(errs[0] > errs[1], "{errs:?}");
    assert!(errs[0] > errs[2], "{errs:?}");
}

#[test]
fn sweep_tasks_produce_keyed_deterministic_rows() {
    use lorenz5::diagnostics::{sweep, SweepGrid, SweepTask};
    // DeltaF cells over an eps grid: same decreasing-error trend as the
    // direct experiment, through the sweep plumbing.
    let cfg = IntegratorConfig::adaptive(1e-12, 1e-12);
    let grid = SweepGrid {
        eps_values: vec![1e-2, 1e-3, 1e-4],
        m_values: vec![1.0],
        k_values: vec![0.5],
        theta0_values: vec![0.0],
        task: SweepTask::DeltaF,
    };
    let table = sweep(&grid, &cfg).unwrap();
    assert_eq!(table.rows.len(), 3);
    let eps_col: Vec<f64> = table.rows.iter().map(|r| r.eps).collect();
    assert_eq!(eps_col, vec![1e-2, 1e-3, 1e-4], "row order is the index order");
    let errs: Vec<f64> = table.rows.iter().map(|r| r.outputs[2]).collect();
    assert!(errs[0] > errs[1] && errs[0] > errs[2], "{errs:?}");

    // A single Lyapunov cell runs end to end.
    let grid = SweepGrid {
        eps_values: vec![0.1],
        m_values: vec![1.0],
        k_values: vec![0.5],
        theta0_values: vec![0.0],
        task: SweepTask::Lyapunov,
    };
    let cfg = IntegratorConfig::adaptive(1e-9, 1e-9);
    let table = sweep(&grid, &cfg).unwrap();
    assert_eq!(table.rows[0].status, "ok");
    assert!(table.rows[0].outputs[0] > 0.02, "lambda {}", table.rows[0].outputs[0]);
}

#[test]
fn lyapunov_robust_to_delta0_and_grows_with_eps() {
    let s = MelnikovSetup::new(1.0, 0.5, 0.0).unwrap();
    let b = HeteroclinicBranch::plus(1.0).unwrap();
    let seed = separatrix_seed(&s, &b).unwrap();
    let cfg = IntegratorConfig::adaptive(1e-10, 1e-10);

    // Two different offsets agree to 20%.
    let l8 = lyapunov_mle(0.1, &seed, 400.0, 1.0, 1e-8, &cfg).unwrap().lambda_max;
    let l9 = lyapunov_mle(0.1, &seed, 400.0, 1.0, 1e-9, &cfg).unwrap().lambda_max;
    assert!((l8 - l9).abs() < 0.2 * l8.abs().max(l9.abs()), "{l8} vs {l9}");

    // Monotone trend in the separatrix layer across eps (5% slack).
    let lam = |eps: f64| lyapunov_mle(eps, &seed, 800.0, 1.0, 1e-8, &cfg).unwrap().lambda_max;
    let (l1, l2, l3) = (lam(0.02), lam(0.05), lam(0.1));
    assert!(l2 > 0.95 * l1, "{l1} {l2} {l3}");
    assert!(l3 > 0.95 * l2, "{l1} {l2} {l3}");
    assert!(l3 > l1, "{l1} {l2} {l3}");
}

#[test]
fn time_reversal_returns_to_start() {
    // Forward then backward over t = 5 returns within 10x the local
    // tolerance on a regular orbit.
    let s = MelnikovSetup::new(1.0, 0.5, 0.0).unwrap();
    let x0 = lorenz5::diagnostics::regular_seed(&s).unwrap();
    let cfg = IntegratorConfig::adaptive(1e-10, 1e-10);
    let rhs = |_t: f64, p: &PhaseState| models::transformed_rhs_unchecked(p, 0.1);
    let (fwd, st1) = propagate(rhs, &x0, (0.0, 5.0), &cfg).unwrap();
    let (back, st2) = propagate(rhs, &fwd, (5.0, 0.0), &cfg).unwrap();
    assert_eq!(st1, IntegrationStatus::Complete);
    assert_eq!(st2, IntegrationStatus::Complete);
    let err = back.dist(&x0);
    assert!(err < 1e-9, "return error {err}");
}

#[test]
fn transformed_equilibria_on_the_mu2_axis() {
    // (0, +-M, 0, 0, 0) are equilibria of the unperturbed system for any M.
    for m in [0.25, 1.0, 7.5] {
        for sgn in [1.0, -1.0] {
            let p = PhaseState([0.0, sgn * m, 0.0, 0.0, 0.0]);
            let v = models::transformed_rhs_unchecked(&p, 0.0);
            assert_eq!(v.0, [0.0; 5]);
        }
    }
}
