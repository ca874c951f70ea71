//! Closed-form coefficient of the q-fold rotational lattice target
//! `H_T = beta/|a0|^{2q} e^{-g n}(a^{+q} - a0*^q)(a^q - a0^q) e^{-g n}`.

use super::{pair, unpair, Pair};
use crate::error::{invalid, Result};
use crate::fockspace::{ladder, FockOperator, SystemParams};
use crate::linalg::{c, cis, matmul, CMat, CVec, C64};
use crate::specfun::laguerre_assoc;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatLattice {
    pub q: u32,
    pub alpha0: Pair,
    pub gamma: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl CatLattice {
    fn sigma2(&self) -> f64 {
        1.0 / (1.0 - (-2.0 * self.gamma).exp())
    }

    pub fn k_max(&self) -> f64 {
        8.0 / (self.lambda * (1.0 - (-2.0 * self.gamma).exp())).sqrt()
    }

    /// `(h, f_h(k))` for the three harmonics `0, +q, -q`.
    ///
    /// The `q!` in front of `1F1(1+q;1;-u)` and the Gaussian in the two
    /// `tau`-dependent terms follow from transforming the Q-function
    /// directly; `q! 1F1(1+q;1;-u) = q! e^{-u} L_q(u)` is used so the net
    /// exponent `lambda k^2/4 - u` is formed once.
    pub fn tau_harmonics(&self, k: f64) -> BTreeMap<i32, C64> {
        let q = self.q as i32;
        let lam = self.lambda;
        let s2 = self.sigma2();
        let a = unpair(self.alpha0) * self.gamma.exp();
        let u = 0.5 * lam * s2 * k * k;
        let env = (0.25 * lam * k * k - u).exp();
        let pref = self.beta * lam * s2.powi(q + 1) / a.norm_sqr().powi(q) * env;
        let qfact: f64 = (1..=self.q).map(|j| j as f64).product();
        let r = (0.5 * lam).sqrt() * k;
        let minus_i = c(0.0, -1.0);
        let dc = qfact * laguerre_assoc(self.q as usize, 0, u) + (a.norm_sqr() / s2).powi(q);
        let t_minus = (minus_i * a * r).powi(q); // multiplies e^{-iq tau}
        let t_plus = (minus_i * a.conj() * r).powi(q); // multiplies e^{+iq tau}
        BTreeMap::from([
            (0, c(pref * dc, 0.0)),
            (-q, -t_minus * pref),
            (q, -t_plus * pref),
        ])
    }

    pub fn eval(&self, k: f64, tau: f64) -> C64 {
        self.tau_harmonics(k)
            .iter()
            .map(|(&h, &v)| v * cis(h as f64 * tau))
            .sum()
    }
}

/// Cat-lattice coefficient; rejects `gamma <= 0`.
pub fn ncft_cat_lattice(q: u32, alpha0: C64, gamma: f64, params: &SystemParams) -> Result<CatLattice> {
    if !(gamma > 0.0) {
        return Err(invalid("ncft", "gamma", "must be > 0"));
    }
    if q < 1 {
        return Err(invalid("ncft", "q", "must be >= 1"));
    }
    Ok(CatLattice {
        q,
        alpha0: pair(alpha0),
        gamma,
        beta: params.beta,
        lambda: params.lambda,
    })
}

/// Fock matrix of the lattice target on `n` levels.
pub fn cat_target_operator(q: u32, alpha0: C64, gamma: f64, beta: f64, n: usize) -> FockOperator {
    let (a, _) = ladder(n);
    let mut aq = CMat::identity(n, n);
    for _ in 0..q {
        aq = matmul(&aq, &a);
    }
    let shifted = aq - CMat::identity(n, n) * alpha0.powi(q as i32);
    let damp = CMat::from_diagonal(&CVec::from_fn(n, |m, _| c((-gamma * m as f64).exp(), 0.0)));
    let left = matmul(&damp, &shifted.adjoint());
    let right = matmul(&shifted, &damp);
    matmul(&left, &right) * c(beta / alpha0.norm_sqr().powi(q as i32), 0.0)
}
