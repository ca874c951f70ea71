//! Transform of commutators of spectral-line harmonics by the delta-root
//! method.
//!
//! For lines `delta(k - kappa) w(tau)`, the coefficient of `[V_l', V_l'']`
//! at the phase-space point `K = k e^{i theta}` collects the pairs
//! `(tau', tau'')` with `kappa_a e^{i tau'} + kappa_b e^{i tau''} = K`:
//!
//! `F(K) = (i/4pi) sum w_a(tau') w_b(tau'') e^{-i(l' tau' + l'' tau'')}
//!          sin(lambda kappa_a kappa_b sin(tau' - tau'')/2) / |sin(tau' - tau'')|`.
//!
//! The Jacobian of the root map is `|kappa_a kappa_b sin(tau' - tau'')|`;
//! its `|kappa_a kappa_b|` part cancels the measure `|k' k''|` and the sine
//! part is the denominator above.

use super::SpectralLineSet;
use crate::linalg::{cis, C64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coefficient of `[V_la(a), V_lb(b)]` for two line sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineBracket {
    pub a: SpectralLineSet,
    pub la: i32,
    pub b: SpectralLineSet,
    pub lb: i32,
    pub lambda: f64,
}

/// First-order Magnus coefficient of a line drive,
/// `sum_{l=1}^{l_max} (1/(lambda Omega l)) [F_{l,-l} + F_{-l,0} e^{-il Omega t0} + conj(F_{-l,0}(-k)) e^{il Omega t0}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFirstOrder {
    pub lines: SpectralLineSet,
    pub l_max: usize,
    pub lambda: f64,
    pub omega: f64,
    pub t0: f64,
}

struct Root {
    wa: C64,
    wb: C64,
    tau_a: f64,
    tau_b: f64,
    kernel: f64,
}

const K_FLOOR: f64 = 1e-7;

fn roots(a: &SpectralLineSet, b: &SpectralLineSet, lambda: f64, k: f64, theta: f64) -> Vec<Root> {
    // at K = 0 the root set of equal-radius pairs is a continuum; the value
    // there is taken as the limit along the direction theta
    let k = if k.abs() < K_FLOOR { K_FLOOR.copysign(k) } else { k };
    let kx = k * theta.cos();
    let ky = k * theta.sin();
    let kk = k.abs();
    let big_theta = ky.atan2(kx);
    let mut out = Vec::new();
    for la in &a.lines {
        let ra = la.k.abs();
        for lb in &b.lines {
            let rb = lb.k.abs();
            if ra == 0.0 || rb == 0.0 || kk > ra + rb || kk < (ra - rb).abs() {
                continue;
            }
            let cphi = ((kk * kk + ra * ra - rb * rb) / (2.0 * kk * ra)).clamp(-1.0, 1.0);
            let phi = cphi.acos();
            for sgn in [1.0, -1.0] {
                let ud = big_theta + sgn * phi;
                let (ux, uy) = (ra * ud.cos(), ra * ud.sin());
                let vd = (ky - uy).atan2(kx - ux);
                let tau_a = if la.k > 0.0 { ud } else { ud + PI };
                let tau_b = if lb.k > 0.0 { vd } else { vd + PI };
                let s = (tau_a - tau_b).sin();
                let kernel = if s == 0.0 {
                    0.0
                } else {
                    (0.5 * lambda * la.k * lb.k * s).sin() / s.abs()
                };
                out.push(Root {
                    wa: la.weight(tau_a),
                    wb: lb.weight(tau_b),
                    tau_a,
                    tau_b,
                    kernel,
                });
            }
        }
    }
    out
}

fn edges_of(a: &SpectralLineSet, b: &SpectralLineSet) -> Vec<f64> {
    let mut e = vec![0.0];
    for la in &a.lines {
        for lb in &b.lines {
            e.push((la.k.abs() - lb.k.abs()).abs());
            e.push(la.k.abs() + lb.k.abs());
        }
    }
    e.sort_by(f64::total_cmp);
    e.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    e
}

fn sum_roots(rs: &[Root], la: i32, lb: i32) -> C64 {
    let s: C64 = rs
        .iter()
        .map(|r| r.wa * r.wb * cis(-(la as f64 * r.tau_a + lb as f64 * r.tau_b)) * r.kernel)
        .sum();
    s * I / (4.0 * PI)
}

impl LineBracket {
    pub fn eval(&self, k: f64, theta: f64) -> C64 {
        let rs = roots(&self.a, &self.b, self.lambda, k, theta);
        sum_roots(&rs, self.la, self.lb)
    }

    pub fn edges(&self) -> Vec<f64> {
        edges_of(&self.a, &self.b)
    }
}

impl LineFirstOrder {
    pub fn eval(&self, k: f64, theta: f64) -> C64 {
        let rs = roots(&self.lines, &self.lines, self.lambda, k, theta);
        let rs_neg = roots(&self.lines, &self.lines, self.lambda, -k, theta);
        let mut acc = C64::default();
        for l in 1..=self.l_max as i32 {
            let ph = cis(-(l as f64) * self.omega * self.t0);
            let f_ll = sum_roots(&rs, l, -l);
            let f_l0 = sum_roots(&rs, -l, 0);
            let f_l0_neg = sum_roots(&rs_neg, -l, 0);
            acc += (f_ll + f_l0 * ph + (f_l0_neg * ph).conj()) / (self.lambda * self.omega * l as f64);
        }
        acc
    }

    pub fn edges(&self) -> Vec<f64> {
        edges_of(&self.lines, &self.lines)
    }
}
