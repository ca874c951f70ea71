use super::*;
use crate::fockspace::{position, rotation_operator};
use crate::linalg::{block, commutator, eigh, hermitize, matmul, max_abs, rel_frobenius};
use proptest::prelude::*;
use std::f64::consts::PI;

fn params(n: usize) -> SystemParams {
    SystemParams {
        n_fock: n,
        ..SystemParams::default()
    }
}

fn unit(n: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(a, b)] = c(1.0, 0.0);
    m
}

#[test]
fn f00_is_gaussian() {
    let lam = 2.5f64;
    for k in [-2.0f64, -0.3, 0.0, 0.7, 1.9] {
        for tau in [0.0, 1.1] {
            let want = lam * (-lam * k * k / 4.0).exp();
            assert!((fnm_coefficient(0, 0, k, tau, lam) - want).norm() < 1e-14);
            let lit = fnm_literal(0, 0, k, tau, lam, 20.0).unwrap();
            assert!((lit - want).norm() < 1e-13);
        }
    }
}

#[test]
fn literal_kummer_form_matches_stable_form() {
    let lam = 2.5;
    for n in 0..7 {
        for m in 0..7 {
            for &(k, tau) in &[(0.4, 0.3), (-1.3, 2.0), (2.2, -0.8)] {
                let a = fnm_coefficient(n, m, k, tau, lam);
                let b = fnm_literal(n, m, k, tau, lam, 20.0).unwrap();
                assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()), "{n} {m} {k}: {a} {b}");
            }
        }
    }
    assert!(fnm_literal(0, 2, 0.0, 0.0, lam, 20.0).is_err());
    assert!(fnm_literal(0, 0, 30.0, 0.0, lam, 20.0).is_err());
    // the stable form reaches the finite k -> 0 limit
    assert_eq!(fnm_coefficient(0, 2, 0.0, 0.0, lam), C64::default());
}

#[test]
fn fnm_hermiticity() {
    let lam = 2.5;
    for (n, m) in [(0, 1), (2, 5), (4, 1)] {
        for k in [0.3, 1.7] {
            let a = fnm_coefficient(n, m, k, 0.4, lam);
            let b = fnm_coefficient(m, n, -k, 0.4, lam).conj();
            assert!((a - b).norm() < 1e-14);
        }
    }
    let x = position(10, lam);
    let f = ncft_forward(&x, &params(10));
    for k in [0.2, 1.0, 2.5] {
        for tau in [0.0, 0.9, 4.0] {
            assert!((f.eval(k, tau) - f.eval(-k, tau).conj()).norm() < 1e-10);
        }
    }
}

#[test]
fn tau_harmonics_resum_to_point_value() {
    let op = hermitize(&CMat::from_fn(8, 8, |a, b| c((a + 2 * b) as f64 * 0.1, (a as f64 - b as f64) * 0.05)));
    let f = ncft_forward(&op, &params(8));
    let (k, tau) = (0.8, 1.3);
    let s: C64 = f
        .tau_harmonics(k)
        .iter()
        .map(|(&h, &v)| v * cis(h as f64 * tau))
        .sum();
    assert!((s - f.eval(k, tau)).norm() < 1e-13);
}

#[test]
fn inverse_reconstructs_single_ket_bra() {
    let n = 12;
    let p = params(n);
    let f = NcftCoefficient::Fock(ncft_forward(&unit(n, 2, 3), &p));
    let op = inverse_ncft(&f, &p, &QuadConfig::default()).unwrap();
    assert!(max_abs(&(op - unit(n, 2, 3))) < 1e-6);
}

#[test]
fn quadrature_check_passes_for_fock_coefficient() {
    let n = 10;
    let p = params(n);
    let f = NcftCoefficient::Fock(ncft_forward(&unit(n, 1, 4), &p));
    let quad = QuadConfig {
        check: true,
        ..QuadConfig::default()
    };
    assert!(inverse_ncft(&f, &p, &quad).is_ok());
}

#[test]
fn monochromatic_lines() {
    let p = SystemParams::default();
    let set = ncft_monochromatic(&p);
    assert_eq!(set.lines.len(), 2);
    assert_eq!(set.lines[0].k, 1.0);
    assert_eq!(set.lines[0].harmonics[&2], [0.5, 0.0]);
    assert_eq!(set.lines[1].k, -1.0);
    assert_eq!(set.lines[1].harmonics[&-2], [0.5, 0.0]);
    assert!(set.is_conjugate_closed(0.0));
    let spec = synth_drive(&NcftCoefficient::Lines(set), &p, &QuadConfig::default()).unwrap();
    for &(x, t) in &[(0.0, 0.0), (1.3, 0.4), (-2.0, 5.5)] {
        let v = drive_potential(&spec, x, t);
        assert!((v - 0.5 * (x + 2.0 * t).cos()).abs() < 1e-14);
    }
    let json = spec.lines_json().unwrap();
    let back: Vec<DriveSpecLine> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.len(), 1);
}

#[test]
fn zero_coefficient_gives_zero_everything() {
    let p = params(8);
    let f = NcftCoefficient::Lines(SpectralLineSet::default());
    assert!(f.is_zero());
    let h = rotating_frame_hamiltonian(&f, 0.3, &p, &QuadConfig::default()).unwrap();
    assert_eq!(max_abs(&h), 0.0);
    let spec = synth_drive(&f, &p, &QuadConfig::default()).unwrap();
    assert_eq!(drive_potential(&spec, 0.4, 0.2), 0.0);
}

#[test]
fn monochromatic_frame_at_zero_is_matrix_cosine() {
    let p = SystemParams {
        n_fock: 40,
        ..SystemParams::default()
    };
    let f = NcftCoefficient::Lines(ncft_monochromatic(&p));
    let h = rotating_frame_hamiltonian(&f, 0.0, &p, &QuadConfig::default()).unwrap();
    // oracle: beta cos(x) by diagonalizing x on a larger basis
    let (vals, vecs) = eigh(&position(90, p.lambda));
    let cosd = CMat::from_diagonal(&nalgebra::DVector::from_iterator(90, vals.iter().map(|v| c(p.beta * v.cos(), 0.0))));
    let oracle = matmul(&matmul(&vecs, &cosd), &vecs.adjoint());
    assert!(max_abs(&(block(&h, 30) - block(&oracle, 30))) < 1e-8);
}

#[test]
fn fock_coefficient_drive_is_real() {
    let n = 16;
    let p = params(n);
    let op = hermitize(&CMat::from_fn(n, n, |a, b| c(((a * 7 + b * 3) % 5) as f64 * 0.1, (a as f64 - b as f64) * 0.03)));
    let f = NcftCoefficient::Fock(ncft_forward(&op, &p));
    let quad = QuadConfig {
        k_nodes: 400,
        tau_grid: 32,
        ..QuadConfig::default()
    };
    // full-line integral of |k|/2 f(k, tau) e^{ikx}: imaginary part must cancel
    let km = match f.support() {
        KSupport::Gaussian { k_max } => k_max,
        _ => unreachable!(),
    };
    // split at the |k| kink
    let (kp, wp) = crate::quadrature::gauss_legendre_on(300, 0.0, km);
    let ks: Vec<f64> = kp.iter().map(|k| -k).chain(kp.iter().copied()).collect();
    let ws: Vec<f64> = wp.iter().chain(wp.iter()).copied().collect();
    let spec = synth_drive(&f, &p, &quad).unwrap();
    for &(x, t) in &[(0.0, 0.0), (0.5, 1.0), (-1.5, 2.0)] {
        let z: C64 = ks
            .iter()
            .zip(&ws)
            .map(|(&k, &w)| f.eval(k, t) * cis(k * x) * (0.5 * w * k.abs()))
            .sum();
        assert!(z.im.abs() < 1e-10 * z.norm().max(1.0));
        let v = drive_potential(&spec, x, t);
        assert!((v - z.re).abs() < 1e-8 * z.norm().max(1.0), "{v} vs {}", z.re);
    }
    let mut buf = Vec::new();
    spec.write_csv(&mut buf, 32).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("k,t,amplitude,phase"));
    assert_eq!(text.lines().count(), 1 + 400 * 32);
}

fn fig5(beta: f64) -> (SystemParams, CatLattice) {
    let p = SystemParams {
        lambda: 0.25,
        beta,
        n_sym: 4,
        n_fock: 120,
        ..SystemParams::default()
    };
    let cl = ncft_cat_lattice(4, c(1.198, 0.0), 0.25, &p).unwrap();
    (p, cl)
}

#[test]
fn cat_closed_form_matches_fock_route() {
    let (p, cl) = fig5(1.0);
    let op = cat_target_operator(4, c(1.198, 0.0), 0.25, 1.0, p.n_fock);
    let fb = ncft_forward(&op, &p);
    let kc = ((1.0 - (-0.5f64).exp()) / (4.0 * p.lambda)).sqrt();
    for i in 0..=20 {
        let k = 0.1 + (3.0 * kc - 0.1) * i as f64 / 20.0;
        for tau in [0.0, PI / 7.0] {
            let a = cl.eval(k, tau);
            let b = fb.eval(k, tau);
            assert!((a - b).norm() <= 1e-6 * b.norm().max(1e-300), "k={k} tau={tau}: {a} vs {b}");
        }
    }
    assert!(ncft_cat_lattice(4, c(1.198, 0.0), 0.0, &p).is_err());
}

#[test]
fn cat_coefficient_is_q_fold_periodic() {
    let (_, cl) = fig5(0.1);
    for k in [0.2, 0.9, 2.0] {
        for tau in [0.0, 0.3, 2.0] {
            let a = cl.eval(k, tau);
            let b = cl.eval(k, tau + PI / 2.0);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}

#[test]
fn cat_frame_q_fold_covariance() {
    let (mut p, cl) = fig5(0.1);
    p.n_fock = 50;
    let f = NcftCoefficient::Closed(ClosedForm::CatLattice(cl));
    let fr = FrameHamiltonian::from_coefficient(&f, &p, &QuadConfig::default()).unwrap();
    let r = rotation_operator(PI / 2.0, p.n_fock);
    let t = 0.37;
    let a = fr.eval(t + PI / 2.0);
    let b = matmul(&matmul(&r.adjoint(), &fr.eval(t)), &r);
    assert!(max_abs(&(a - b)) < 1e-8);
}

#[test]
fn cat_inverse_matches_target_operator() {
    let (mut p, cl) = fig5(1.0);
    p.n_fock = 60;
    let f = NcftCoefficient::Closed(ClosedForm::CatLattice(cl));
    let op = inverse_ncft(&f, &p, &QuadConfig::default()).unwrap();
    let target = cat_target_operator(4, c(1.198, 0.0), 0.25, 1.0, 60);
    assert!(rel_frobenius(&block(&op, 50), &block(&target, 50)) < 1e-8);
}

#[test]
fn time_shift_phases_harmonics() {
    let p = params(20);
    let f = NcftCoefficient::Lines(ncft_monochromatic(&p));
    let fr = FrameHamiltonian::from_coefficient(&f, &p, &QuadConfig::default()).unwrap();
    let sh = fr.time_shifted(0.7);
    assert!(max_abs(&(sh.eval(0.2) - fr.eval(0.9))) < 1e-12);
    for l in [-3, 0, 1, 4] {
        assert!(max_abs(&(sh.harmonic(l) - fr.harmonic(l) * cis(l as f64 * 0.7))) < 1e-12);
    }
}

fn mono_frame(n: usize) -> (SystemParams, FrameHamiltonian) {
    let p = params(n);
    let f = NcftCoefficient::Lines(ncft_monochromatic(&p));
    let fr = FrameHamiltonian::from_coefficient(&f, &p, &QuadConfig::default()).unwrap();
    (p, fr)
}

#[test]
fn line_bracket_matches_fock_commutator() {
    let (p, fr) = mono_frame(40);
    let lines = ncft_monochromatic(&p);
    for (la, lb) in [(1, -1), (-1, 0), (2, 3)] {
        let br = NcftCoefficient::Closed(ClosedForm::LineBracket(LineBracket {
            a: lines.clone(),
            la,
            b: lines.clone(),
            lb,
            lambda: p.lambda,
        }));
        let op = inverse_ncft(&br, &p, &QuadConfig::default()).unwrap();
        let want = commutator(&fr.harmonic(la), &fr.harmonic(lb));
        let err = rel_frobenius(&block(&op, 30), &block(&want, 30));
        assert!(err < 1e-6, "[{la},{lb}] err {err:.3e}");
    }
}

#[test]
fn line_bracket_of_equal_harmonics_vanishes() {
    let p = SystemParams::default();
    let lines = ncft_monochromatic(&p);
    let br = LineBracket {
        a: lines.clone(),
        la: 2,
        b: lines,
        lb: 2,
        lambda: p.lambda,
    };
    for k in [0.3, 1.0, 1.9, 2.5] {
        for th in [0.0, 0.6] {
            assert!(br.eval(k, th).norm() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn round_trip_random_hermitian(seed in any::<u64>()) {
        let n = 12;
        let p = params(n);
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let raw = CMat::from_fn(n, n, |_, _| c(next(), next()));
        let op = hermitize(&raw);
        let f = NcftCoefficient::Fock(ncft_forward(&op, &p));
        let back = inverse_ncft(&f, &p, &QuadConfig::default()).unwrap();
        prop_assert!(max_abs(&(back - &op)) < 1e-6);
    }

    #[test]
    fn line_bracket_antisymmetric(k in 0.05f64..2.5, th in 0.0f64..std::f64::consts::TAU, la in -4i32..5, lb in -4i32..5) {
        let p = SystemParams::default();
        let lines = ncft_monochromatic(&p);
        let ab = LineBracket { a: lines.clone(), la, b: lines.clone(), lb, lambda: p.lambda };
        let ba = LineBracket { a: lines.clone(), la: lb, b: lines, lb: la, lambda: p.lambda };
        prop_assert!((ab.eval(k, th) + ba.eval(k, th)).norm() < 1e-10);
    }
}
