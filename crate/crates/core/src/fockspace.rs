//! Truncated Fock space: ladder operators, plane waves, coherent and cat
//! states, Q-functions and phase-space rotations.

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, cis, CMat, CVec, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Dense operator in the number basis `|0>..|N-1>`.
pub type FockOperator = CMat;

pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Dimensionless Planck constant.
    pub lambda: f64,
    /// Floquet frequency in units of the oscillator frequency.
    pub omega: f64,
    /// Resonance order of the monochromatic drive.
    pub n_sym: u32,
    pub beta: f64,
    pub t0: f64,
    pub n_fock: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            lambda: 2.5,
            omega: 1.0,
            n_sym: 2,
            beta: 0.5,
            t0: 0.0,
            n_fock: 60,
        }
    }
}

impl SystemParams {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn validate(&self) -> Result<()> {
        let m = "fockspace";
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid(m, "lambda", "must be positive and finite"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(invalid(m, "omega", "must be positive and finite"));
        }
        if self.n_sym < 1 {
            return Err(invalid(m, "n_sym", "must be >= 1"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid(m, "beta", "must be non-negative and finite"));
        }
        if !(self.t0 >= 0.0 && self.t0 < self.period()) {
            return Err(invalid(m, "t0", "must lie in [0, 2pi/omega)"));
        }
        if self.n_fock < 2 {
            return Err(invalid(m, "n_fock", "must be >= 2"));
        }
        Ok(())
    }
}

/// Normalized state vector with a record of its truncation tail.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub amps: CVec,
}

impl FockState {
    /// Wraps and normalizes `amps`, warning when the last level carries more
    /// than `DEFAULT_TAIL_THRESHOLD` of the weight.
    pub fn new(amps: CVec) -> FockState {
        let n = amps.norm();
        let s = FockState { amps: amps / c(n, 0.0) };
        if s.tail_weight() > DEFAULT_TAIL_THRESHOLD {
            log::warn!(
                "fockspace: truncation tail {:.3e} at N = {} exceeds {:.0e}",
                s.tail_weight(),
                s.dim(),
                DEFAULT_TAIL_THRESHOLD
            );
        }
        s
    }

    pub fn basis(m: usize, dim: usize) -> FockState {
        let mut v = CVec::zeros(dim);
        v[m] = c(1.0, 0.0);
        FockState { amps: v }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn tail_weight(&self) -> f64 {
        self.amps[self.dim() - 1].norm_sqr()
    }

    pub fn truncated(&self, threshold: f64) -> bool {
        self.tail_weight() > threshold
    }

    pub fn inner(&self, other: &FockState) -> C64 {
        self.amps.dotc(&other.amps)
    }
}

pub fn number(n: usize) -> FockOperator {
    CMat::from_diagonal(&CVec::from_fn(n, |i, _| c(i as f64, 0.0)))
}

/// Annihilation and creation operators.
pub fn ladder(n: usize) -> (FockOperator, FockOperator) {
    let mut a = CMat::zeros(n, n);
    for m in 1..n {
        a[(m - 1, m)] = c((m as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    (a, ad)
}

pub fn position(n: usize, lambda: f64) -> FockOperator {
    let (a, ad) = ladder(n);
    (ad + a) * c((lambda / 2.0).sqrt(), 0.0)
}

pub fn momentum(n: usize, lambda: f64) -> FockOperator {
    let (a, ad) = ladder(n);
    (ad - a) * c(0.0, (lambda / 2.0).sqrt())
}

/// `exp(-i tau a^dag a)`.
pub fn rotation_operator(tau: f64, n: usize) -> FockOperator {
    CMat::from_diagonal(&CVec::from_fn(n, |m, _| cis(-tau * m as f64)))
}

/// Photon parity `exp(i pi a^dag a)`.
pub fn parity(n: usize) -> FockOperator {
    CMat::from_diagonal(&CVec::from_fn(n, |m, _| {
        c(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }))
}

/// Normalized Laguerre functions
/// `g_n^{(d)}(x) = sqrt(n!/(n+d)!) e^{-x/2} x^{d/2} L_n^{(d)}(x)`
/// for all `n + d < dim`, indexed `[d][n]`.
///
/// Built by the recurrence in `n` at fixed `d`, which never forms the
/// factorials or the raw polynomial and so stays finite for large `n`.
pub fn laguerre_function_table(x: f64, dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(dim);
    let lx = x.ln();
    for d in 0..dim {
        let len = dim - d;
        let mut g = vec![0.0; len];
        let df = d as f64;
        g[0] = if x == 0.0 {
            if d == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-0.5 * x + 0.5 * df * lx - 0.5 * crate::specfun::ln_factorial(d)).exp()
        };
        if len > 1 {
            g[1] = (1.0 + df - x) * g[0] / (1.0 + df).sqrt();
        }
        for n in 1..len.saturating_sub(1) {
            let nf = n as f64;
            g[n + 1] = ((2.0 * nf + 1.0 + df - x) * g[n] - (nf * (nf + df)).sqrt() * g[n - 1])
                / ((nf + 1.0) * (nf + 1.0 + df)).sqrt();
        }
        out.push(g);
    }
    out
}

/// `(i sgn k)^d` for `d >= 0`.
#[inline]
pub(crate) fn i_sgn_pow(k: f64, d: usize) -> C64 {
    let s = if k < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
    match d % 4 {
        0 => c(s, 0.0),
        1 => c(0.0, s),
        2 => c(-s, 0.0),
        _ => c(0.0, -s),
    }
}

/// Matrix of `exp(ik(x cos tau + p sin tau))`:
/// `<n|.|m> = (i sgn k)^{|m-n|} e^{-i(m-n)tau} g_{min(n,m)}^{(|m-n|)}(lambda k^2/2)`.
pub fn planewave_matrix(k: f64, tau: f64, lambda: f64, n: usize) -> FockOperator {
    let g = laguerre_function_table(0.5 * lambda * k * k, n);
    CMat::from_fn(n, n, |a, b| {
        let (lo, d) = if a <= b { (a, b - a) } else { (b, a - b) };
        let phase = cis(-(b as f64 - a as f64) * tau);
        i_sgn_pow(k, d) * phase * g[d][lo]
    })
}

/// Coherent state by the normalized term recursion `c_m = c_{m-1} alpha/sqrt(m)`.
pub fn coherent_state(alpha: C64, n: usize) -> FockState {
    FockState::new(coherent_amplitudes(alpha, n))
}

/// Untruncated coherent-state amplitudes on the first `n` levels (not renormalized).
pub fn coherent_amplitudes(alpha: C64, n: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[0] = c((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 1..n {
        v[m] = v[m - 1] * alpha / (m as f64).sqrt();
    }
    v
}

/// Squared norm of the unnormalized cat `sum_p e^{-i 2 pi s p/q} |alpha w^p>`,
/// evaluated from the sector weight `q^2 sum_{m = s mod q} |c_m|^2`.
pub fn cat_normalization(q: usize, s: usize, alpha: C64, n: usize) -> f64 {
    let amps = coherent_amplitudes(alpha, n);
    let w: f64 = (0..n).filter(|m| m % q == s % q).map(|m| amps[m].norm_sqr()).sum();
    (q * q) as f64 * w
}

/// q-component cat state with photon-number support on `m = s (mod q)`.
pub fn cat_state(q: usize, s: usize, alpha: C64, n: usize) -> Result<FockState> {
    if q < 2 {
        return Err(invalid("fockspace", "q", "cat states need q >= 2"));
    }
    if s >= q {
        return Err(invalid("fockspace", "s", "quasinumber must be < q"));
    }
    let norm = cat_normalization(q, s, alpha, n);
    if norm < 1e-24 {
        return Err(Error::DegenerateNormalization { s, norm });
    }
    let amps = coherent_amplitudes(alpha, n);
    let v = CVec::from_fn(n, |m, _| {
        if m % q == s {
            amps[m] * (q as f64)
        } else {
            c(0.0, 0.0)
        }
    });
    Ok(FockState::new(v))
}

/// `Q(x, p) = <alpha|op|alpha>` with `alpha = (x + ip)/sqrt(2 lambda)`.
pub fn qfunction(op: &FockOperator, points: &[(f64, f64)], lambda: f64) -> Vec<C64> {
    let n = op.nrows();
    points
        .par_iter()
        .map(|&(x, p)| {
            let v = coherent_amplitudes(c(x, p) / (2.0 * lambda).sqrt(), n);
            v.dotc(&(op * &v))
        })
        .collect()
}
