//! Noncommutative Fourier transform (NcFT) coefficients `f(k, tau)`.
//!
//! An operator is written as `(1/2pi) int dtau int dk |k|/2 f(k,tau) D(k,tau)`
//! with `D(k,tau) = exp(ik(x cos tau + p sin tau))`; as a drive, the same
//! coefficient gives the potential `V(x,t) = int dk |k|/2 f(k, Omega t) e^{ikx}`.

mod bracket;
mod cat;
mod drive;
mod frame;

pub use bracket::{LineBracket, LineFirstOrder};
pub use cat::{cat_target_operator, ncft_cat_lattice, CatLattice};
pub use drive::{drive_potential, synth_drive, DriveSpec, DriveSpecLine};
pub use frame::{inverse_ncft, rotating_frame_hamiltonian, FrameHamiltonian, QuadConfig};

use crate::error::{Error, Result};
use crate::fockspace::{i_sgn_pow, laguerre_function_table, FockOperator, SystemParams};
use crate::linalg::{c, cis, CMat, C64};
use crate::specfun::{kummer_1f1_regularized, ln_factorial};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Complex number serialized as `[re, im]`.
pub(crate) type Pair = [f64; 2];

pub(crate) fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub(crate) fn unpair(p: Pair) -> C64 {
    c(p[0], p[1])
}

/// One delta line `delta(k - k_j) w_j(tau)` with `w_j` a finite Fourier series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub k: f64,
    pub harmonics: BTreeMap<i32, Pair>,
}

impl SpectralLine {
    pub fn weight(&self, tau: f64) -> C64 {
        self.harmonics
            .iter()
            .map(|(&h, &w)| unpair(w) * cis(h as f64 * tau))
            .sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralLineSet {
    pub lines: Vec<SpectralLine>,
}

impl SpectralLineSet {
    /// True when every line `(k, w)` has a partner `(-k, w*)`.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        self.lines.iter().all(|a| {
            self.lines.iter().any(|b| {
                (a.k + b.k).abs() <= tol
                    && a.harmonics.iter().all(|(&h, &w)| {
                        let partner = b.harmonics.get(&-h).map(|&p| unpair(p)).unwrap_or_default();
                        (partner - unpair(w).conj()).norm() <= tol
                    })
                    && b.harmonics.len() == a.harmonics.len()
            })
        })
    }

    pub fn scaled(&self, s: f64) -> SpectralLineSet {
        let lines = self
            .lines
            .iter()
            .map(|l| SpectralLine {
                k: l.k,
                harmonics: l.harmonics.iter().map(|(&h, &w)| (h, [w[0] * s, w[1] * s])).collect(),
            })
            .collect();
        SpectralLineSet { lines }
    }
}

/// `f = sum c_nm f_nm`, the transform of the operator `sum c_nm |n><m|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "FockRepr", try_from = "FockRepr")]
pub struct FockBackedCoefficient {
    pub coeffs: CMat,
    pub lambda: f64,
}

impl FockBackedCoefficient {
    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn eval(&self, k: f64, tau: f64) -> C64 {
        let n = self.dim();
        let g = laguerre_function_table(0.5 * self.lambda * k * k, n);
        let mut s = C64::default();
        for a in 0..n {
            for b in 0..n {
                let cab = self.coeffs[(a, b)];
                if cab == C64::default() {
                    continue;
                }
                s += cab * fnm_from_table(&g, a, b, k, tau);
            }
        }
        s * self.lambda
    }

    /// Fourier components in `tau`: `f(k,tau) = sum_h f_h(k) e^{ih tau}` with
    /// `f_h(k) = lambda sum_{m-n=h} c_nm conj(<n|D(k,0)|m>)`.
    pub fn tau_harmonics(&self, k: f64) -> BTreeMap<i32, C64> {
        let n = self.dim();
        let g = laguerre_function_table(0.5 * self.lambda * k * k, n);
        let mut out: BTreeMap<i32, C64> = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let cab = self.coeffs[(a, b)];
                if cab == C64::default() {
                    continue;
                }
                let h = b as i32 - a as i32;
                *out.entry(h).or_default() += cab * fnm_from_table(&g, a, b, k, 0.0) * self.lambda;
            }
        }
        out
    }

    /// Harmonic indices `m - n` carried by nonzero coefficients.
    pub fn harmonic_indices(&self, tol: f64) -> Vec<i32> {
        let n = self.dim() as i32;
        (-(n - 1)..n)
            .filter(|&h| {
                (0..self.dim()).any(|a| {
                    let b = a as i32 + h;
                    b >= 0 && b < n && self.coeffs[(a, b as usize)].norm() > tol
                })
            })
            .collect()
    }

    /// Gaussian envelope edge: beyond it every Laguerre function on the
    /// truncated basis has decayed below ~1e-13.
    pub fn k_max(&self) -> f64 {
        let n = self.dim() as f64;
        let x_max = 4.0 * n + 12.0 * n.sqrt() + 60.0;
        (2.0 * x_max / self.lambda).sqrt()
    }
}

/// Serialized form: row-major `[re, im]` entries.
#[derive(Serialize, Deserialize)]
struct FockRepr {
    dim: usize,
    lambda: f64,
    coeffs: Vec<Pair>,
}

impl From<FockBackedCoefficient> for FockRepr {
    fn from(f: FockBackedCoefficient) -> FockRepr {
        let n = f.dim();
        let coeffs = (0..n * n).map(|i| pair(f.coeffs[(i / n, i % n)])).collect();
        FockRepr {
            dim: n,
            lambda: f.lambda,
            coeffs,
        }
    }
}

impl TryFrom<FockRepr> for FockBackedCoefficient {
    type Error = String;

    fn try_from(r: FockRepr) -> std::result::Result<Self, String> {
        if r.coeffs.len() != r.dim * r.dim {
            return Err(format!("expected {} coefficients, found {}", r.dim * r.dim, r.coeffs.len()));
        }
        Ok(FockBackedCoefficient {
            coeffs: CMat::from_fn(r.dim, r.dim, |a, b| unpair(r.coeffs[a * r.dim + b])),
            lambda: r.lambda,
        })
    }
}

// f_nm / lambda without the lambda factor
#[inline]
fn fnm_from_table(g: &[Vec<f64>], n: usize, m: usize, k: f64, tau: f64) -> C64 {
    let (lo, d) = if n <= m { (n, m - n) } else { (m, n - m) };
    (i_sgn_pow(k, d) * cis(-(m as f64 - n as f64) * tau)).conj() * g[d][lo]
}

/// Named analytic coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedForm {
    CatLattice(CatLattice),
    LineBracket(LineBracket),
    LineFirstOrder(LineFirstOrder),
}

impl ClosedForm {
    pub fn eval(&self, k: f64, tau: f64) -> C64 {
        match self {
            ClosedForm::CatLattice(c) => c.eval(k, tau),
            ClosedForm::LineBracket(b) => b.eval(k, tau),
            ClosedForm::LineFirstOrder(f) => f.eval(k, tau),
        }
    }

    pub fn support(&self) -> KSupport {
        match self {
            ClosedForm::CatLattice(c) => KSupport::Gaussian { k_max: c.k_max() },
            ClosedForm::LineBracket(b) => KSupport::Compact { edges: b.edges() },
            ClosedForm::LineFirstOrder(f) => KSupport::Compact { edges: f.edges() },
        }
    }

    /// Exact `tau` harmonics when known in closed form.
    pub fn tau_harmonics(&self, k: f64) -> Option<BTreeMap<i32, C64>> {
        match self {
            ClosedForm::CatLattice(c) => Some(c.tau_harmonics(k)),
            _ => None,
        }
    }
}

/// Where a coefficient lives in `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum KSupport {
    Discrete,
    /// Nonzero only for `|k|` inside `[edges[0], edges.last()]`; interior
    /// edges mark square-root kinks and are used as quadrature breakpoints.
    Compact { edges: Vec<f64> },
    Gaussian { k_max: f64 },
}

/// Tagged union of the three coefficient representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", content = "payload", rename_all = "snake_case")]
pub enum NcftCoefficient {
    Lines(SpectralLineSet),
    Fock(FockBackedCoefficient),
    Closed(ClosedForm),
}

impl NcftCoefficient {
    /// Point value. Spectral lines are distributions; their point value is the
    /// weight of a line sitting exactly at `k` and zero elsewhere.
    pub fn eval(&self, k: f64, tau: f64) -> C64 {
        match self {
            NcftCoefficient::Lines(s) => s
                .lines
                .iter()
                .filter(|l| l.k == k)
                .map(|l| l.weight(tau))
                .sum(),
            NcftCoefficient::Fock(f) => f.eval(k, tau),
            NcftCoefficient::Closed(c) => c.eval(k, tau),
        }
    }

    pub fn support(&self) -> KSupport {
        match self {
            NcftCoefficient::Lines(_) => KSupport::Discrete,
            NcftCoefficient::Fock(f) => KSupport::Gaussian { k_max: f.k_max() },
            NcftCoefficient::Closed(c) => c.support(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NcftCoefficient::Lines(s) => s
                .lines
                .iter()
                .all(|l| l.harmonics.values().all(|w| w[0] == 0.0 && w[1] == 0.0)),
            NcftCoefficient::Fock(f) => f.coeffs.iter().all(|z| *z == C64::default()),
            NcftCoefficient::Closed(_) => false,
        }
    }
}

/// `f_nm(k, tau) = lambda conj(<n|D(k,tau)|m>)`, the transform of `|n><m|`,
/// evaluated through normalized Laguerre functions (finite for every `k`,
/// including the `m > n`, `k -> 0` limit).
pub fn fnm_coefficient(n: usize, m: usize, k: f64, tau: f64, lambda: f64) -> C64 {
    let g = laguerre_function_table(0.5 * lambda * k * k, n.max(m) + 1);
    fnm_from_table(&g, n, m, k, tau) * lambda
}

/// `f_nm` from the Kummer-function expression
/// `e^{lambda k^2/4} sqrt(n!/m!) (i e^{i tau} sqrt(2/lambda)/k)^{m-n} lambda M~(1+n; 1-m+n; -lambda k^2/2)`.
///
/// Rejects `|k| > k_max` (overflow of `e^{lambda k^2/4}`) and `k = 0` when `m > n`.
pub fn fnm_literal(n: usize, m: usize, k: f64, tau: f64, lambda: f64, k_max: f64) -> Result<C64> {
    if k.abs() > k_max {
        return Err(Error::Domain {
            module: "ncft",
            msg: format!("|k| = {} beyond k_max = {k_max}", k.abs()),
        });
    }
    let d = m as i32 - n as i32;
    if k == 0.0 && d > 0 {
        return Err(Error::Domain {
            module: "ncft",
            msg: "literal f_nm has negative powers of k at k = 0".into(),
        });
    }
    let x = 0.5 * lambda * k * k;
    let kum = kummer_1f1_regularized(1.0 + n as f64, 1.0 - d as f64, -x)?;
    let log_fact = 0.5 * (ln_factorial(n) - ln_factorial(m));
    let base = c(0.0, 1.0) * cis(tau) * ((2.0 / lambda).sqrt() / k);
    let pw = if k == 0.0 { c(1.0, 0.0) } else { base.powi(d) };
    Ok(pw * ((0.5 * x + log_fact).exp() * lambda * kum))
}

/// Forward transform of a Fock matrix: the coefficient `sum c_nm f_nm`.
pub fn ncft_forward(op: &FockOperator, params: &SystemParams) -> FockBackedCoefficient {
    FockBackedCoefficient {
        coeffs: op.clone(),
        lambda: params.lambda,
    }
}

/// Lines of `beta cos(x + n Omega t)`: `beta delta(k-1) e^{in tau} + beta delta(k+1) e^{-in tau}`.
pub fn ncft_monochromatic(params: &SystemParams) -> SpectralLineSet {
    let n = params.n_sym as i32;
    let b = params.beta;
    SpectralLineSet {
        lines: vec![
            SpectralLine {
                k: 1.0,
                harmonics: BTreeMap::from([(n, [b, 0.0])]),
            },
            SpectralLine {
                k: -1.0,
                harmonics: BTreeMap::from([(-n, [b, 0.0])]),
            },
        ],
    }
}

#[cfg(test)]
mod tests;
