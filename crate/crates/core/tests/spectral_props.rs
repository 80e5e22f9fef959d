use nhq::model::{gamma_of_t, hamiltonian_at, ModelParams, Parity};
use nhq::spectral::{classify_phase, eigensystem, gap_squared, Level, PtPhase};
use nhq::C64;
use proptest::prelude::*;

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Zero), Just(Parity::Half), Just(Parity::One)]
}

prop_compose! {
    fn model()(n in parity(), nu in 0.2f64..3.0, delta in -3.0f64..3.0, tau in 0.05f64..5.0, eta in 0.2f64..0.8)
        -> ModelParams {
        let delta = if (delta - 1.0).abs() < 0.05 { delta + 0.1 } else { delta };
        ModelParams::new(n, nu, delta, tau).with_eta(eta)
    }
}

/// Away from the exceptional points, relative to the coupling scale.
fn regular(p: &ModelParams, t: f64) -> bool {
    gap_squared(p, t).abs() > 1e-3 * p.nu * p.nu
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn biorthonormal(p in model(), t in -8.0f64..8.0) {
        prop_assume!(regular(&p, t));
        let s = eigensystem(&p, t).unwrap();
        let m = s.overlap_matrix();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - target).norm() < 1e-10, "<{i}|{j}> = {v}");
            }
        }
    }

    #[test]
    fn eigen_residuals(p in model(), t in -8.0f64..8.0) {
        prop_assume!(regular(&p, t));
        let h = hamiltonian_at(&p, t);
        let s = eigensystem(&p, t).unwrap();
        let scale = h.norm().max(1.0);
        for level in [Level::Up, Level::Down] {
            let e = s.energy(level);
            let r = s.right(level);
            let hr = h.apply(r);
            prop_assert!((hr[0] - e * r[0]).norm() + (hr[1] - e * r[1]).norm() < 1e-12 * scale);
            let l = s.left(level);
            let lh = h.apply_left(l);
            let ln = l[0].norm() + l[1].norm();
            prop_assert!((lh[0] - e * l[0]).norm() + (lh[1] - e * l[1]).norm() < 1e-12 * scale * ln);
        }
        prop_assert!((s.energy(Level::Up) + s.energy(Level::Down)).norm() < 1e-14 * scale);
    }

    #[test]
    fn energies_follow_gap(p in model(), t in -8.0f64..8.0) {
        prop_assume!(regular(&p, t));
        let s = eigensystem(&p, t).unwrap();
        let e = s.energy(Level::Up);
        let g2 = gap_squared(&p, t);
        prop_assert!((4.0 * e * e - g2).norm() < 1e-12 * g2.abs().max(1.0));
        match classify_phase(&p, t) {
            PtPhase::Symmetric => prop_assert!(e.im.abs() < 1e-14 * e.norm() && e.re > 0.0),
            PtPhase::Broken => prop_assert!(e.re.abs() < 1e-14 * e.norm() && e.im > 0.0),
            PtPhase::ExceptionalPoint => prop_assert!(false, "classified as exceptional away from it"),
        }
    }

    #[test]
    fn gap_is_even_and_gamma_odd(p in model(), t in 0.0f64..8.0) {
        let (g, gm) = (gamma_of_t(&p, t), gamma_of_t(&p, -t));
        prop_assert_eq!(g, -gm);
        let (a, b) = (gap_squared(&p, t), gap_squared(&p, -t));
        prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
    }

    #[test]
    fn hamiltonian_is_traceless(p in model(), t in -8.0f64..8.0) {
        let h = hamiltonian_at(&p, t);
        prop_assert!(h.trace().norm() <= 1e-15 * h.norm().max(1.0));
        let det = h.det();
        prop_assert!((-4.0 * det - C64::new(gap_squared(&p, t), 0.0)).norm() <= 1e-12 * h.norm().powi(2).max(1.0));
    }
}

#[test]
fn rejects_delta_one_and_ep_proximity() {
    assert!(ModelParams::new(Parity::Zero, 1.0, 1.0, 1.0).validate().is_err());
    let p = ModelParams::symmetric_family(1.0);
    let t_ep = p.time_of_gamma(p.gamma_ep().unwrap());
    assert!(eigensystem(&p, t_ep).is_err());
    assert_eq!(classify_phase(&p, t_ep), PtPhase::ExceptionalPoint);
}
