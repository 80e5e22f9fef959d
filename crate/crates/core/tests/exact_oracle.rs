use std::f64::consts::PI;

use nhq::dynamics::{integrate, plan_scenario, IntegratorConfig, Scenario, State};
use nhq::exact::{exact_amplitudes, exact_coeffs, exact_density, exact_state, AbCoefficients, CoeffSource, ExactSolverParams};
use nhq::model::{hamiltonian_at, ModelParams, QuenchWindow};
use nhq::spectral::{eigensystem, Level};
use nhq::{Error, C64};

/// `max |exact - integrated|` over the common time grid, both unit-normalized.
/// The RK4 global phase error scales as dt^4 and reaches 4e-3 at tau = 1 with
/// the default step over the long adiabatic lead-in, so the comparison runs at
/// a sixteenth of it.
fn max_gap(model: &ModelParams, scenario: Scenario, angle: f64, source: CoeffSource) -> f64 {
    let mut cfg = IntegratorConfig::for_tau_q(model.tau_q);
    cfg.dt /= 16.0;
    let plan = plan_scenario(model, scenario, angle, &cfg).unwrap();
    let ep = ExactSolverParams::new(*model).unwrap();
    let coeffs = exact_coeffs(&ep, &plan.initial, plan.t_i, source).unwrap();
    let start = exact_state(&ep, &coeffs, plan.t_i).unwrap();
    let w = QuenchWindow::new(plan.t_i, plan.t_f, cfg.dt).unwrap();
    let traj = integrate(model, &w, start, &cfg).unwrap();
    let stride = (traj.len() / 400).max(1);
    let mut worst: f64 = 0.0;
    for k in (0..traj.len()).step_by(stride).chain([traj.len() - 1]) {
        let e = exact_state(&ep, &coeffs, traj.times[k]).unwrap();
        let n = traj.states[k];
        worst = worst.max((e.c1 - n.c1).norm()).max((e.c2 - n.c2).norm());
    }
    worst
}

#[test]
fn weber_orders() {
    let sym = ExactSolverParams::new(ModelParams::symmetric_family(0.8)).unwrap();
    // K = -1: nu = i tau / 4 - 1
    assert!((sym.weber_order - C64::new(-1.0, 0.2)).norm() < 1e-14);
    assert!((sym.k - C64::new(-1.0, 0.0)).norm() == 0.0);
    let br = ExactSolverParams::new(ModelParams::broken_family(0.8)).unwrap();
    assert!((br.weber_order - C64::new(0.2, 0.0)).norm() < 1e-14);
    assert!(ExactSolverParams::new(ModelParams::symmetric_family(1.0).with_eta(0.4)).is_err());
}

#[test]
fn oracle_equivalence_from_minus_infinity() {
    for tau in [0.1, 0.5, 1.0] {
        let g = max_gap(&ModelParams::symmetric_family(tau), Scenario::SymToMinusEp, PI / 2.0, CoeffSource::MinusInfinity);
        assert!(g <= 1e-6, "tau {tau}: {g}");
    }
}

#[test]
fn oracle_equivalence_from_near_ep() {
    for tau in [0.1, 0.5, 1.0] {
        let g = max_gap(&ModelParams::symmetric_family(tau), Scenario::SymFromNearEp, PI / 2.0, CoeffSource::Initial);
        assert!(g <= 1e-6, "tau {tau}: {g}");
    }
}

#[test]
fn oracle_equivalence_broken() {
    for (s, angle, tau) in [(Scenario::BrokenFromMinusInf, 1.25 * PI, 0.5), (Scenario::BrokenFromNearEp, 0.2 * PI, 0.3)] {
        let g = max_gap(&ModelParams::broken_family(tau), s, angle, CoeffSource::Initial);
        assert!(g <= 1e-6, "{s:?}: {g}");
    }
}

#[test]
fn boundary_condition_is_reproduced() {
    let model = ModelParams::symmetric_family(0.5);
    let ep = ExactSolverParams::new(model).unwrap();
    let plan = plan_scenario(&model, Scenario::SymFromNearEp, PI / 2.0, &IntegratorConfig::for_tau_q(0.5)).unwrap();
    let c = exact_coeffs(&ep, &plan.initial, plan.t_i, CoeffSource::Initial).unwrap();
    let s = exact_state(&ep, &c, plan.t_i).unwrap();
    assert!((s.c1 - plan.initial.c1).norm() < 1e-8 && (s.c2 - plan.initial.c2).norm() < 1e-8);
}

#[test]
fn general_formula_recovers_the_minus_infinity_coefficients() {
    for tau in [0.25, 1.0] {
        let model = ModelParams::symmetric_family(tau);
        let ep = ExactSolverParams::new(model).unwrap();
        let inf = exact_coeffs(&ep, &State::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)), 0.0, CoeffSource::MinusInfinity)
            .unwrap();
        let t_i = -3.0 * tau;
        let raw = exact_amplitudes(&ep, &inf, t_i).unwrap();
        let back = exact_coeffs(&ep, &State::new(raw[0], raw[1]), t_i, CoeffSource::Initial).unwrap();
        assert!((back.a - inf.a).norm() < 1e-8 * inf.b.norm(), "a {}", back.a);
        assert!((back.b - inf.b).norm() < 1e-8 * inf.b.norm(), "b {} vs {}", back.b, inf.b);
    }
    // delta = 2, tau = 1: k = -1, so b = |k'| sqrt(tau) exp(pi / 16) / 2 with |k'| = 1
    let ep = ExactSolverParams::new(ModelParams::symmetric_family(1.0)).unwrap();
    let inf = exact_coeffs(&ep, &State::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)), 0.0, CoeffSource::MinusInfinity).unwrap();
    assert_eq!(inf.a, C64::new(0.0, 0.0));
    assert!((inf.b.re - (PI / 16.0).exp() / 2.0).abs() < 1e-15);
}

/// `max |i psi' - H psi| / |psi|` on a grid, with a Richardson derivative.
fn schrodinger_residual(ep: &ExactSolverParams, c: &AbCoefficients, ts: impl Iterator<Item = f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for t in ts {
        let psi = |t: f64| exact_amplitudes(ep, c, t).unwrap();
        let d = |h: f64| {
            let (p, m) = (psi(t + h), psi(t - h));
            [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)]
        };
        let (d1, d2) = (d(1e-3), d(2e-3));
        let dpsi = [(d1[0] * 4.0 - d2[0]) / 3.0, (d1[1] * 4.0 - d2[1]) / 3.0];
        let p0 = psi(t);
        let hp = hamiltonian_at(&ep.model, t).apply(p0);
        let i = C64::new(0.0, 1.0);
        let r = ((i * dpsi[0] - hp[0]).norm_sqr() + (i * dpsi[1] - hp[1]).norm_sqr()).sqrt();
        worst = worst.max(r / (p0[0].norm_sqr() + p0[1].norm_sqr()).sqrt());
    }
    worst
}

#[test]
fn exact_solution_solves_the_schrodinger_equation() {
    let grid = |a: f64, b: f64| (0..=40).map(move |k| a + (b - a) * k as f64 / 40.0);
    for tau in [0.3, 1.0, 1.7] {
        let ep = ExactSolverParams::new(ModelParams::symmetric_family(tau)).unwrap();
        let c = AbCoefficients { a: C64::new(0.3, -0.1), b: C64::new(0.8, 0.2) };
        let r = schrodinger_residual(&ep, &c, grid(-4.0 * tau, 4.0 * tau));
        assert!(r <= 1e-6, "symmetric tau {tau}: {r}");
        let ep = ExactSolverParams::new(ModelParams::broken_family(tau)).unwrap();
        let r = schrodinger_residual(&ep, &c, grid(-4.0 * tau, 4.0 * tau));
        assert!(r <= 1e-6, "broken tau {tau}: {r}");
    }
}

#[test]
fn imaginary_broken_order_is_not_a_solution() {
    let ep = ExactSolverParams::new(ModelParams::broken_family(1.0)).unwrap().with_imaginary_broken_order();
    let c = AbCoefficients { a: C64::new(0.3, -0.1), b: C64::new(0.8, 0.2) };
    let r = schrodinger_residual(&ep, &c, (0..=20).map(|k| -4.0 + 0.4 * k as f64));
    assert!(r > 1e-2, "residual {r}");
}

#[test]
fn broken_norm_grows_at_the_least_dissipative_rate() {
    let model = ModelParams::broken_family(1.0);
    let ep = ExactSolverParams::new(model).unwrap();
    let plan = plan_scenario(&model, Scenario::BrokenFromMinusInf, 1.25 * PI, &IntegratorConfig::for_tau_q(1.0)).unwrap();
    let c = exact_coeffs(&ep, &plan.initial, plan.t_i, CoeffSource::Initial).unwrap();
    for (t1, t2) in [(-24.0, -16.0), (-16.0, -8.0), (-10.0, -5.0)] {
        let ln_norm = |t: f64| exact_state(&ep, &c, t).unwrap().log_norm;
        let growth = ln_norm(t2) - ln_norm(t1);
        let n = 2000;
        let h = (t2 - t1) / n as f64;
        let rate: f64 = (0..n)
            .map(|k| eigensystem(&model, t1 + h * (k as f64 + 0.5)).unwrap().energy(Level::Up).im.abs() * h)
            .sum();
        assert!((growth - rate).abs() <= 0.1 * rate, "[{t1}, {t2}]: {growth} vs {rate}");
    }
}

#[test]
fn exact_density_matches_numerics() {
    let cfg = IntegratorConfig::for_tau_q(1.0);
    let sym = ModelParams::symmetric_family(1.0);
    let e = exact_density(&sym, Scenario::SymToMinusEp, 1.0, PI / 2.0, &cfg).unwrap();
    let n = nhq::dynamics::defect_density_run(&sym, Scenario::SymToMinusEp, 1.0, PI / 2.0, &cfg).unwrap();
    assert!((e - n).abs() < 1e-6, "{e} vs {n}");
}

#[test]
fn gamma_pole_is_reported() {
    // broken family: nu = tau / 4, so tau = 4 puts Gamma(-nu) on a pole
    let model = ModelParams::broken_family(4.0);
    let ep = ExactSolverParams::new(model).unwrap();
    let s = State::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    assert!(matches!(exact_coeffs(&ep, &s, -10.0, CoeffSource::Initial), Err(Error::GammaPole(_))));
}
