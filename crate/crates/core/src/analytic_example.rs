//! Closed forms for the monochromatically driven oscillator
//! `H = (x^2 + p^2)/2 + beta cos(x + n Omega t)`.

use crate::fockspace::{FockOperator, SystemParams};
use crate::linalg::{c, cis, CMat, C64};
use crate::magnus::DEFAULT_L_MAX;
use crate::specfun::{bessel_j, laguerre_assoc, ln_factorial};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonoParams {
    pub n_sym: u32,
    pub beta: f64,
    pub lambda: f64,
    pub omega: f64,
    pub t0: f64,
    pub l_max: usize,
}

impl Default for MonoParams {
    fn default() -> Self {
        MonoParams::from_system(&SystemParams::default(), DEFAULT_L_MAX)
    }
}

impl MonoParams {
    pub fn from_system(p: &SystemParams, l_max: usize) -> MonoParams {
        MonoParams {
            n_sym: p.n_sym,
            beta: p.beta,
            lambda: p.lambda,
            omega: p.omega,
            t0: p.t0,
            l_max,
        }
    }
}

/// Time-averaged Hamiltonian
/// `(beta/2) e^{-lambda/4 - i n pi/2} (lambda/2)^{-n/2} a^n L^{(-n)}_{a^dag a}(lambda/2) + h.c.`
/// on `dim` levels.
pub fn rwa_target(p: &MonoParams, dim: usize) -> FockOperator {
    let n = p.n_sym as usize;
    let x = 0.5 * p.lambda;
    let pref = cis(-0.5 * PI * n as f64) * (0.5 * p.beta * (-0.25 * p.lambda).exp() * x.powf(-0.5 * n as f64));
    let mut h = CMat::zeros(dim, dim);
    // <m-n| a^n L^{(-n)}_{a^dag a} |m> = sqrt(m!/(m-n)!) L_m^{(-n)}(x)
    for m in n..dim {
        let ratio = (0.5 * (ln_factorial(m) - ln_factorial(m - n))).exp();
        let v = pref * (ratio * laguerre_assoc(m, -(n as i32), x));
        h[(m - n, m)] += v;
        h[(m, m - n)] += v.conj();
    }
    h
}

/// Q-function of [`rwa_target`]: `beta e^{-lambda/4} J_n(r) cos(n theta + n pi/2)`.
pub fn rwa_q_exact(p: &MonoParams, r: f64, theta: f64) -> f64 {
    let n = p.n_sym as f64;
    p.beta * (-0.25 * p.lambda).exp() * bessel_j(p.n_sym as usize, r) * (n * theta + 0.5 * n * PI).cos()
}

const SINGULAR: f64 = 1e-8;

/// `sin(lambda s/2)/|s|` with `s = sin(2 arccos(k/2))`; the removable
/// points `k = 0, +-2` take the one-sided limit `+-lambda/2`.
fn kernel(k: f64, lambda: f64) -> f64 {
    let s = (2.0 * (0.5 * k).acos()).sin();
    if s.abs() < SINGULAR {
        0.5 * lambda * if s < 0.0 { -1.0 } else { 1.0 }
    } else {
        (0.5 * lambda * s).sin() / s.abs()
    }
}

/// Coefficient of `[V_l, V_-l]` for the monochromatic lines.
pub fn f_l_minus_l(k: f64, tau: f64, l: i32, p: &MonoParams) -> f64 {
    if k.abs() > 2.0 {
        return 0.0;
    }
    let n = p.n_sym as i32;
    let a = (0.5 * k).acos();
    let sign = if (n + l).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    p.beta * p.beta / PI
        * kernel(k, p.lambda)
        * (2.0 * l as f64 * a).sin()
        * ((2.0 * n as f64 * tau).cos() + sign * (2.0 * n as f64 * a).cos())
}

/// Coefficient of `[V_-l, V_0]` for the monochromatic lines.
pub fn f_minus_l_0(k: f64, tau: f64, l: i32, p: &MonoParams) -> C64 {
    if k.abs() > 2.0 {
        return C64::default();
    }
    let n = p.n_sym as f64;
    let lf = l as f64;
    let a = (0.5 * k).acos();
    let b = (-0.5 * k).acos();
    let bracket = cis((2.0 * n + lf) * tau) * (lf * a).sin() - cis(-(2.0 * n - lf) * tau) * (lf * b).sin()
        + cis(lf * tau) * (cis(-n * PI) * ((2.0 * n + lf) * a).sin() + cis(n * PI) * ((2.0 * n - lf) * b).sin());
    bracket * (-p.beta * p.beta / (2.0 * PI) * kernel(k, p.lambda))
}

/// First-order Magnus coefficient,
/// `sum_{l=1}^{l_max} (1/(lambda Omega l)) [f_{l,-l} + f_{-l,0} e^{-il Omega t0} + (f_{-l,0}(-k) e^{-il Omega t0})^*]`.
pub fn f1_analytic(k: f64, tau: f64, p: &MonoParams) -> C64 {
    if k.abs() > 2.0 {
        return C64::default();
    }
    let mut acc = C64::default();
    for l in 1..=p.l_max as i32 {
        let ph = cis(-(l as f64) * p.omega * p.t0);
        let t1 = c(f_l_minus_l(k, tau, l, p), 0.0);
        let t2 = f_minus_l_0(k, tau, l, p) * ph;
        let t3 = (f_minus_l_0(-k, tau, l, p) * ph).conj();
        acc += (t1 + t2 + t3) / (p.lambda * p.omega * l as f64);
    }
    acc
}
