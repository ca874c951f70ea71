use super::*;
use crate::analytic_example::{rwa_target, MonoParams};
use crate::fockspace::{coherent_state, SystemParams};
use crate::linalg::{eigvalsh, expm_herm, hermitize, matmul, unitary_eigen};
use crate::ncft::{ncft_monochromatic, NcftCoefficient, QuadConfig};
use proptest::prelude::*;
use std::f64::consts::PI;

fn mono(n: usize, beta: f64) -> (SystemParams, FrameHamiltonian) {
    let s = SystemParams {
        n_fock: n,
        beta,
        ..SystemParams::default()
    };
    let f = NcftCoefficient::Lines(ncft_monochromatic(&s));
    let fr = FrameHamiltonian::from_coefficient(&f, &s, &QuadConfig::default()).unwrap();
    (s, fr)
}

#[test]
fn fold_zone_edges() {
    let (l, w) = (2.5, 1.0);
    assert_eq!(fold_quasienergy(1.25, l, w), 1.25);
    assert!((fold_quasienergy(-1.25, l, w) - 1.25).abs() < 1e-15);
    assert!((fold_quasienergy(3.0, l, w) - 0.5).abs() < 1e-15);
    assert!((fold_quasienergy(-7.4, l, w) - 0.1).abs() < 1e-14);
    assert!((quasienergy_distance(1.2, -1.2, l, w) - 0.1).abs() < 1e-14);
}

#[test]
fn zero_drive_is_diagonal() {
    let s = SystemParams {
        n_fock: 6,
        ..SystemParams::default()
    };
    let fr = FrameHamiltonian::zeros(6);
    let det = 0.13;
    let sol = quasienergy_solve_detuned(&fr, 2, det, &s).unwrap();
    assert_eq!(sol.len(), 6 * 5);
    let mut want: Vec<f64> = (0..6)
        .flat_map(|m| (-2..=2).map(move |mm| s.lambda * (det * m as f64 + s.omega * mm as f64)))
        .map(|e| fold_quasienergy(e, s.lambda, s.omega))
        .collect();
    let mut got = sol.epsilon.clone();
    want.sort_by(f64::total_cmp);
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
    for a in 0..sol.len() {
        let col = sol.modes.column(a);
        assert_eq!(col.iter().filter(|z| z.norm() > 1e-12).count(), 1);
        let snap0 = micromotion(&sol, a, 0.0).unwrap();
        let snap1 = micromotion(&sol, a, 2.1).unwrap();
        assert!((state_fidelity(&snap0, &snap1).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn guards() {
    let s = SystemParams::default();
    let fr = FrameHamiltonian::zeros(1000);
    assert!(matches!(
        quasienergy_solve(&fr, 10, &s),
        Err(Error::DimensionOverflow { dim: 21000, .. })
    ));
    assert!(quasienergy_solve(&FrameHamiltonian::zeros(4), 0, &s).is_err());
    let cfg = PropagatorConfig {
        steps: 32,
        ..PropagatorConfig::default()
    };
    assert!(propagator(&FrameHamiltonian::zeros(4), 0.0, &s, &cfg).is_err());
}

#[test]
fn modes_normalized_and_periodic() {
    let (s, fr) = mono(16, 0.5);
    let sol = quasienergy_solve(&fr, 3, &s).unwrap();
    for a in (0..sol.len()).step_by(7) {
        let w: f64 = sol.sector_weights(a).iter().sum();
        assert!((w - 1.0).abs() < 1e-10);
        let x = micromotion(&sol, a, 0.7).unwrap();
        let y = micromotion(&sol, a, 0.7 + s.period()).unwrap();
        assert!((x.amps.norm() - 1.0).abs() < 1e-12);
        assert!((&x.amps - &y.amps).norm() < 1e-10);
    }
}

#[test]
fn spectrum_invariant_under_time_shift() {
    let (s, fr) = mono(20, 0.5);
    let base = quasienergy_solve(&fr, 4, &s).unwrap();
    let shifted = quasienergy_solve(&fr.time_shifted(0.9), 4, &s).unwrap();
    let mut a = base.epsilon.clone();
    let mut b = shifted.epsilon.clone();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    for (x, y) in a.iter().zip(&b) {
        assert!(quasienergy_distance(*x, *y, s.lambda, s.omega) < 1e-8);
    }
    let moved = (0..base.len())
        .map(|j| (base.modes.column(j) - shifted.modes.column(j)).norm())
        .fold(0.0, f64::max);
    assert!(moved > 1e-3);
}

#[test]
fn zero_drive_propagator_is_identity() {
    let s = SystemParams::default();
    let r = propagator(&FrameHamiltonian::zeros(8), 0.3, &s, &PropagatorConfig::default()).unwrap();
    assert!(max_abs(&(r.unitary - CMat::identity(8, 8))) < 1e-15);
    assert_eq!(r.step_count, 128);
}

#[test]
fn static_drive_propagator_is_exponential() {
    let s = SystemParams::default();
    let mut fr = FrameHamiltonian::zeros(5);
    let h = hermitize(&CMat::from_fn(5, 5, |a, b| c((a * b) as f64 * 0.1, a as f64 - b as f64)));
    // a static rotating-frame Hamiltonian needs G_h(a, b) at h = b - a
    for a in 0..5 {
        for b in 0..5 {
            let e = fr.g.entry(b as i32 - a as i32).or_insert_with(|| CMat::zeros(5, 5));
            e[(a, b)] = h[(a, b)];
        }
    }
    assert!(max_abs(&(fr.eval(1.3) - &h)) < 1e-14);
    for integ in [Integrator::Midpoint, Integrator::Magnus4] {
        let cfg = PropagatorConfig { integrator: integ, ..PropagatorConfig::default() };
        let r = propagator(&fr, 0.0, &s, &cfg).unwrap();
        let want = expm_herm(&h, s.period() / s.lambda);
        assert!(max_abs(&(r.unitary - want)) < 1e-12);
    }
}

#[test]
fn integrators_agree_and_compose() {
    let (s, fr) = mono(12, 0.5);
    let t = s.period();
    let m = evolve(&fr, 0.0, t, &s, 4096, Integrator::Midpoint);
    let g = evolve(&fr, 0.0, t, &s, 512, Integrator::Magnus4);
    assert!(max_abs(&(&m - &g)) < 1e-6);
    let full = propagator(&fr, 0.0, &s, &PropagatorConfig::default()).unwrap();
    assert!(full.unitarity < 1e-10);
    let h1 = evolve(&fr, 0.0, 0.5 * t, &s, full.step_count / 2, Integrator::Magnus4);
    let h2 = evolve(&fr, 0.5 * t, t, &s, full.step_count / 2, Integrator::Magnus4);
    assert!(max_abs(&(matmul(&h2, &h1) - &full.unitary)) < 1e-9);
}

#[test]
fn state_propagation_matches_unitary() {
    let (s, fr) = mono(14, 0.5);
    let u = propagator(&fr, 0.4, &s, &PropagatorConfig::default()).unwrap();
    let states = vec![coherent_state(c(0.8, 0.3), 14), FockState::basis(3, 14)];
    for integ in [Integrator::Midpoint, Integrator::Magnus4] {
        let v = evolve_states(&fr, 0.4, 0.4 + s.period(), &s, u.step_count, integ, &[states[0].amps.clone()]);
        let w = evolve(&fr, 0.4, 0.4 + s.period(), &s, u.step_count, integ);
        assert!((&v[0] - &w * &states[0].amps).norm() < 1e-12);
    }
    let p = propagate_states(&fr, 0.4, &s, &states, &PropagatorConfig::default()).unwrap();
    for (a, b) in p.states.iter().zip(&states) {
        assert!((&a.amps - &u.unitary * &b.amps).norm() < 1e-8);
    }
}

#[test]
fn eigenphases_match_quasienergies() {
    let (s, fr) = mono(10, 0.3);
    let u = propagator(&fr, 0.0, &s, &PropagatorConfig::default()).unwrap();
    let (ph, _) = unitary_eigen(&u.unitary);
    let eps = eigenphase_quasienergies(&ph, &s);
    let sol = quasienergy_solve(&fr, 10, &s).unwrap();
    let central: Vec<f64> = sol.central().iter().map(|&a| sol.epsilon[a]).collect();
    assert_eq!(central.len(), 10);
    for e in &eps {
        let d = central
            .iter()
            .map(|x| quasienergy_distance(*x, *e, s.lambda, s.omega))
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-6, "{e}: {d:.2e}");
    }
}

#[test]
fn weak_drive_approaches_target() {
    let beta = 0.02;
    let (s, fr) = mono(40, beta);
    let sol = quasienergy_solve(&fr, 4, &s).unwrap();
    let h = rwa_target(&MonoParams { beta, ..MonoParams::default() }, 40);
    let (e, refs) = selected_levels(&h);
    let tr = track_levels(&sol, &refs, 0.0).unwrap();
    for (lv, e) in tr.iter().zip(&e) {
        assert!(lv.overlap > 0.99);
        // first Magnus correction is O(beta^2)
        assert!(quasienergy_distance(lv.quasienergy, *e, s.lambda, s.omega) < 10.0 * beta * beta);
    }
}

#[test]
fn fidelity_metrics() {
    let n = 60;
    let id = CMat::identity(n, n);
    assert!((fidelity_cats(&id, 4, 1.538, n).unwrap() - 1.0).abs() < 1e-14);
    let ph = id.clone() * cis(0.7);
    assert!((fidelity_cats(&ph, 4, 1.538, n).unwrap() - 1.0).abs() < 1e-14);
    assert!(fidelity_cats(&id, 4, 1.538, n + 1).is_err());
    let a = FockState::basis(2, 5);
    let b = FockState::basis(3, 5);
    assert_eq!(state_fidelity(&a, &a).unwrap(), 1.0);
    assert_eq!(state_fidelity(&a, &b).unwrap(), 0.0);
    assert!(amplitude_profile_delta(&a, &a).unwrap().iter().all(|&x| x == 0.0));
    assert!(state_fidelity(&a, &FockState::basis(0, 6)).is_err());
    // a rotation by pi/2 permutes the q = 4 cats only up to phases
    let r = crate::fockspace::rotation_operator(PI / 2.0, n);
    assert!((fidelity_cats(&r, 4, 1.538, n).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn selected_levels_are_chiral_pairs() {
    let h = rwa_target(&MonoParams::default(), 60);
    let (e, _) = selected_levels(&h);
    let all = eigvalsh(&h);
    assert_eq!(e[0], all[0]);
    assert_eq!(e[1], all[59]);
    assert!((e[0] + e[1]).abs() < 1e-10);
    assert!((e[2] + e[3]).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fold_lands_in_zone(e in -100.0f64..100.0, l in 0.1f64..4.0, w in 0.2f64..3.0) {
        let f = fold_quasienergy(e, l, w);
        prop_assert!(f > -0.5 * l * w && f <= 0.5 * l * w + 1e-12);
        let k = ((e - f) / (l * w)).round();
        prop_assert!((e - f - k * l * w).abs() < 1e-9);
    }

    #[test]
    fn micromotion_is_periodic(t in 0.0f64..6.0, shift in -3i32..3) {
        let (s, fr) = mono(6, 0.4);
        let sol = quasienergy_solve(&fr, 2, &s).unwrap();
        let a = micromotion(&sol, 5, t).unwrap();
        let b = micromotion(&sol, 5, t + shift as f64 * s.period()).unwrap();
        prop_assert!((&a.amps - &b.amps).norm() < 1e-9);
    }
}
