//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the report is always printed.

use ffg_core::analytic_example::{f_l_minus_l, rwa_q_exact, rwa_target, MonoParams};
use ffg_core::floquet_solver::{
    eigenphase_quasienergies, quasienergy_distance, quasienergy_solve, propagator, selected_levels, track_levels,
    PropagatorConfig,
};
use ffg_core::fockspace::{coherent_state, qfunction, rotation_operator, SystemParams};
use ffg_core::harness::{cat_fidelity, cat_order_frames, fit_loglog, micromotion_profile, mono_frames, sweet_spot_solve, CatSettings};
use ffg_core::linalg::{block, c, commutator, eigvalsh, max_abs, rel_frobenius, unitary_eigen, CMat};
use ffg_core::magnus::extract_harmonics;
use ffg_core::ncft::{
    cat_target_operator, inverse_ncft, ncft_forward, ncft_monochromatic, ClosedForm, LineBracket, NcftCoefficient,
    QuadConfig,
};
use ffg_core::specfun::{bessel_j, kummer_1f1_regularized, laguerre_assoc, rgamma};
use ffg_core::floquet_solver::fold_quasienergy;
use std::f64::consts::PI;
use std::time::Instant;

const TOL_Q: f64 = 1e-8;
const TOL_SYM: f64 = 1e-10;
const TOL_BRACKET: f64 = 1e-6;
const TOL_ROUND_TRIP: f64 = 1e-6;
const TOL_ZERO_MODE: f64 = 1e-6;
const MARGIN: f64 = 0.10;
const SLOPE_0: (f64, f64) = (3.0, 0.3);
const SLOPE_1: (f64, f64) = (4.0, 0.4);
const TOL_SHIFT: f64 = 1e-8;
const TOL_CROSS: f64 = 1e-6;
const TOL_LAGUERRE: f64 = 1e-12;
const TOL_BESSEL: f64 = 1e-10;
const TOL_KUMMER: f64 = 1e-12;
const TOL_KUMMER_POLE: f64 = 1e-6;
const TOL_SWEET: f64 = 1e-3;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mono(n: usize) -> SystemParams {
    SystemParams {
        n_fock: n,
        ..SystemParams::default()
    }
}

fn c1_q_function() -> Outcome {
    let s = mono(60);
    let p = MonoParams::from_system(&s, 10);
    let h = rwa_target(&p, 60);
    let mut pts = Vec::new();
    let mut want = Vec::new();
    for i in 0..=60 {
        let r = 6.0 * i as f64 / 60.0;
        for j in 0..64 {
            let th = 2.0 * PI * j as f64 / 64.0;
            pts.push((r * th.cos(), r * th.sin()));
            want.push(rwa_q_exact(&p, r, th));
        }
    }
    let q = qfunction(&h, &pts, s.lambda);
    let err = q.iter().zip(&want).map(|(z, w)| (z - c(*w, 0.0)).norm()).fold(0.0, f64::max);
    outcome(err <= TOL_Q, format!("max |Q - exact| = {err:.2e} over 61x64 grid (tol {TOL_Q:e})"))
}

fn c2_symmetry() -> Outcome {
    let p = MonoParams::from_system(&mono(60), 10);
    let h = rwa_target(&p, 60);
    let ev = eigvalsh(&h);
    let pair = ev.iter().zip(ev.iter().rev()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    let comm = max_abs(&commutator(&h, &rotation_operator(PI, 60)));
    outcome(
        pair <= TOL_SYM && comm <= TOL_SYM,
        format!("pairing {pair:.2e}, |[H, R_pi]|_max {comm:.2e} (tol {TOL_SYM:e})"),
    )
}

fn c3_bracket() -> Outcome {
    let s = mono(40);
    let mp = MonoParams::from_system(&s, 10);
    let quad = QuadConfig::default();
    let lines = ncft_monochromatic(&s);
    let h = extract_harmonics(&NcftCoefficient::Lines(lines.clone()), 5, &s, &quad).unwrap();
    let mut worst: f64 = 0.0;
    let mut pointwise: f64 = 0.0;
    for l in 1..=4 {
        let br = LineBracket {
            a: lines.clone(),
            la: l,
            b: lines.clone(),
            lb: -l,
            lambda: s.lambda,
        };
        // the reconstructed coefficient is the closed form itself
        for &k in &[-1.9, -0.6, 0.25, 1.4] {
            for &th in &[0.0, 1.3, 4.0] {
                pointwise = pointwise.max((br.eval(k, th) - c(f_l_minus_l(k, th, l, &mp), 0.0)).norm());
            }
        }
        let op = inverse_ncft(&NcftCoefficient::Closed(ClosedForm::LineBracket(br)), &s, &quad).unwrap();
        let want = commutator(&h.get(l), &h.get(-l));
        worst = worst.max(rel_frobenius(&block(&op, 30), &block(&want, 30)));
    }
    outcome(
        worst <= TOL_BRACKET && pointwise < 1e-12,
        format!("max rel Frobenius {worst:.2e} on 30x30 block, l = 1..4 (tol {TOL_BRACKET:e}); closed form vs bracket {pointwise:.1e}"),
    )
}

fn c4_round_trip() -> Outcome {
    let n = 9;
    let s = mono(n);
    let quad = QuadConfig::default();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut unit = CMat::zeros(n, n);
            unit[(a, b)] = c(1.0, 0.0);
            let f = NcftCoefficient::Fock(ncft_forward(&unit, &s));
            let back = inverse_ncft(&f, &s, &quad).unwrap();
            worst = worst.max(max_abs(&(back - unit)));
        }
    }
    outcome(worst <= TOL_ROUND_TRIP, format!("max entry error {worst:.2e} over n, m <= 8 (tol {TOL_ROUND_TRIP:e})"))
}

fn c5_zero_modes() -> Outcome {
    let n = 120;
    let ht = cat_target_operator(4, c(1.198, 0.0), 0.25, 1.0, n);
    let alpha = 1.198 * 0.25f64.exp();
    let worst = (0..4)
        .map(|s| {
            let z = c(alpha, 0.0) * c(0.0, 2.0 * PI * s as f64 / 4.0).exp();
            (&ht * &coherent_state(z, n).amps).norm()
        })
        .fold(0.0, f64::max);
    outcome(worst <= TOL_ZERO_MODE, format!("max |H_T |alpha_s>| = {worst:.2e} (tol {TOL_ZERO_MODE:e})"))
}

fn c6_correction() -> Outcome {
    let s = mono(60);
    let (m_max, l_max) = (10, 10);
    let quad = QuadConfig::default();
    let (e, targets) = selected_levels(&rwa_target(&MonoParams::from_system(&s, l_max), s.n_fock));
    let frames = mono_frames(&s, l_max, &quad).unwrap();
    let tracked: Vec<_> = frames
        .iter()
        .map(|fr| track_levels(&quasienergy_solve(fr, m_max, &s).unwrap(), &targets, s.t0).unwrap())
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 0..4 {
        let d0 = fold_quasienergy(tracked[0][k].quasienergy - e[k], s.lambda, s.omega).abs();
        let d1 = fold_quasienergy(tracked[1][k].quasienergy - e[k], s.lambda, s.omega).abs();
        let (f0, f1) = (tracked[0][k].overlap, tracked[1][k].overlap);
        pass &= d1 < d0 - MARGIN * d0 && f1 > f0 + MARGIN * (1.0 - f0);
        parts.push(format!("{}: dE {d0:.1e}->{d1:.1e} F {f0:.4}->{f1:.4}", ["0", "0'", "I", "I'"][k]));
    }
    outcome(pass, parts.join("; "))
}

fn c7_infidelity() -> Outcome {
    let s = SystemParams {
        lambda: 0.25,
        omega: 1.0,
        n_sym: 4,
        beta: 0.1,
        t0: 0.0,
        n_fock: 120,
    };
    let cat = CatSettings::default();
    let quad = QuadConfig::default();
    let prop = PropagatorConfig::default();
    let frames = cat_order_frames(&s, &cat, 10, &quad).unwrap();
    let betas: Vec<f64> = (0..6).map(|i| 0.02 * 10f64.powf(i as f64 / 5.0)).collect();
    let mut slopes = Vec::new();
    let mut table = Vec::new();
    for order in [0, 1] {
        let ifs: Vec<f64> = betas
            .iter()
            .map(|&b| 1.0 - cat_fidelity(&frames, order, b, &s, &cat, &prop).unwrap())
            .collect();
        table.push(ifs.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(" "));
        slopes.push(fit_loglog(&betas, &ifs, [0.02, 0.2]).unwrap().0);
    }
    let ok0 = (slopes[0] - SLOPE_0.0).abs() <= SLOPE_0.1;
    let ok1 = (slopes[1] - SLOPE_1.0).abs() <= SLOPE_1.1;
    outcome(
        ok0 && ok1,
        format!(
            "slopes {:.2} (want {}±{}) and {:.2} (want {}±{}); IF order 0 [{}], order 1 [{}]",
            slopes[0], SLOPE_0.0, SLOPE_0.1, slopes[1], SLOPE_1.0, SLOPE_1.1, table[0], table[1]
        ),
    )
}

fn c8_micromotion() -> Outcome {
    let s = SystemParams {
        t0: PI / 2.0,
        ..mono(60)
    };
    let (m_max, l_max) = (10, 10);
    let (_, targets) = selected_levels(&rwa_target(&MonoParams::from_system(&s, l_max), s.n_fock));
    let [_, corrected] = mono_frames(&s, l_max, &QuadConfig::default()).unwrap();
    let ts: Vec<f64> = (0..64).map(|j| s.period() * j as f64 / 64.0).collect();
    let want = (s.t0 / s.period() * 64.0).round() as usize;
    let prof = micromotion_profile(&corrected, &s, m_max, &targets, &ts).unwrap();
    let peaks: Vec<usize> = prof
        .iter()
        .map(|f| (0..f.len()).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap())
        .collect();
    outcome(
        peaks.iter().all(|&j| j == want),
        format!("argmax grid points {peaks:?}, t0 at point {want}"),
    )
}

/// Largest circular distance in a greedy pairing of two quasienergy lists.
fn multiset_distance(a: &[f64], b: &[f64], p: &SystemParams) -> f64 {
    let mut free = vec![true; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| free[*j])
            .map(|(j, &y)| (j, quasienergy_distance(x, y, p.lambda, p.omega)))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .unwrap();
        free[j] = false;
        worst = worst.max(d);
    }
    worst
}

fn c9_floquet() -> Outcome {
    let s = mono(30);
    let quad = QuadConfig::default();
    let [orig, corrected] = mono_frames(&s, 8, &quad).unwrap();
    let mut shift: f64 = 0.0;
    for fr in [&orig, &corrected] {
        let base = quasienergy_solve(fr, 8, &s).unwrap();
        for t0 in [s.period() / 8.0, s.period() / 4.0] {
            let sh = quasienergy_solve(&fr.time_shifted(s.omega * t0), 8, &s).unwrap();
            shift = shift.max(multiset_distance(&base.epsilon, &sh.epsilon, &s));
        }
    }
    // the default sector cutoff of 10 leaves ~1e-5 here; 14 reaches ~1e-7
    let m_cross = 14;
    let sol = quasienergy_solve(&orig, m_cross, &s).unwrap();
    let u = propagator(&orig, 0.0, &s, &PropagatorConfig::default()).unwrap();
    let eps_u = eigenphase_quasienergies(&unitary_eigen(&u.unitary).0, &s);
    let (_, targets) = selected_levels(&rwa_target(&MonoParams::from_system(&s, 10), s.n_fock));
    let tracked: Vec<f64> = track_levels(&sol, &targets, 0.0).unwrap().iter().map(|l| l.quasienergy).collect();
    let cross = tracked
        .iter()
        .map(|&e| {
            eps_u
                .iter()
                .map(|&x| quasienergy_distance(e, x, s.lambda, s.omega))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    outcome(
        shift <= TOL_SHIFT && cross <= TOL_CROSS,
        format!(
            "time-shift spread {shift:.2e} (tol {TOL_SHIFT:e}); propagator vs quasienergy matrix {cross:.2e} on tracked levels at M_max {m_cross} (tol {TOL_CROSS:e}, {} steps)",
            u.step_count
        ),
    )
}

fn c10_specfun() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    let mut lag: f64 = 0.0;
    for n in 0..=30usize {
        for m in 0..=n {
            for &x in &[0.1, 1.0, 10.0] {
                let d = (n - m) as i32;
                let lhs = laguerre_assoc(m, d, x);
                let ratio: f64 = (m + 1..=n).map(|j| j as f64).product();
                let rhs = ratio * laguerre_assoc(n, -d, x) * (-x).powi(-d);
                lag = lag.max(rel(rhs, lhs).min((rhs - lhs).abs()));
            }
        }
    }
    let mut bes: f64 = 0.0;
    for n in 1..=20usize {
        for i in 0..40 {
            let x = 0.5 + 0.5 * i as f64;
            let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
            bes = bes.max((lhs - 2.0 * n as f64 / x * bessel_j(n, x)).abs());
        }
    }
    let mut kb: f64 = 0.0;
    for &a in &[-2.5, 0.0, 1.0, 3.7] {
        for &b in &[0.5, 1.0, 3.0] {
            kb = kb.max((kummer_1f1_regularized(a, b, 0.0).unwrap() - rgamma(b)).abs());
        }
    }
    for &z in &[-30.0, -1.0, 0.5, 20.0] {
        kb = kb.max(rel(kummer_1f1_regularized(1.0, 1.0, z).unwrap(), z.exp()));
        kb = kb.max((kummer_1f1_regularized(0.0, 2.0, z).unwrap() - 1.0).abs());
    }
    let mut kp: f64 = 0.0;
    for &b in &[0.0, -1.0, -2.0, -5.0] {
        for &(a, z) in &[(1.0, -2.0), (2.5, 0.7), (4.0, -10.0)] {
            let mid = kummer_1f1_regularized(a, b, z).unwrap();
            let scale = mid.abs().max(1.0);
            for db in [-1e-9, 1e-9] {
                kp = kp.max((kummer_1f1_regularized(a, b + db, z).unwrap() - mid).abs() / scale);
            }
        }
    }
    outcome(
        lag <= TOL_LAGUERRE && bes <= TOL_BESSEL && kb <= TOL_KUMMER && kp <= TOL_KUMMER_POLE,
        format!("Laguerre reflection {lag:.1e}, Bessel recurrence {bes:.1e}, 1F1 base {kb:.1e}, 1F1 across b poles {kp:.1e}"),
    )
}

fn c11_sweet_spot() -> Outcome {
    let a = sweet_spot_solve(1.0, 2.0).unwrap();
    outcome((a - 1.538).abs() <= TOL_SWEET, format!("alpha = {a:.10} (want 1.538 ± {TOL_SWEET})"))
}

fn main() {
    let checks: [Check; 11] = [
        ("Q-function identity", c1_q_function),
        ("chiral and rotational symmetry", c2_symmetry),
        ("bracket transform oracle", c3_bracket),
        ("ket-bra round trip", c4_round_trip),
        ("cat zero modes", c5_zero_modes),
        ("first-order correction efficacy", c6_correction),
        ("infidelity scaling", c7_infidelity),
        ("micromotion peak", c8_micromotion),
        ("Floquet invariance and cross-check", c9_floquet),
        ("special functions", c10_specfun),
        ("sweet-spot root", c11_sweet_spot),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = Vec::new();
    for (i, (name, f)) in checks.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name}: {} ({:.1}s)", r.detail, t.elapsed().as_secs_f64());
        if !r.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
