//! Rotating-frame Hamiltonian `H(tau) = int dk |k|/2 f(k,tau) D(k,tau)`.
//!
//! With `Rot(tau) = exp(-i tau n)` one has `D(k,tau) = Rot^dag D(k,0) Rot`,
//! so `H(tau) = Rot^dag G(tau) Rot` where `G(tau) = V(x, tau)` is the lab
//! potential. `G` is stored through its Fourier components
//! `G(tau) = sum_h G_h e^{ih tau}`, which gives the rotating-frame
//! harmonics exactly: `(H_l)_ab = (G_{l + b - a})_ab`.

use super::{KSupport, NcftCoefficient};
use crate::error::{Error, Result};
use crate::fockspace::{i_sgn_pow, laguerre_function_table, planewave_matrix, FockOperator, SystemParams};
use crate::linalg::{c, cis, max_abs, CMat, C64};
use crate::quadrature::gauss_legendre_on;
use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    /// Gauss-Legendre nodes across the whole `k` range.
    pub k_nodes: usize,
    /// Uniform `tau` grid for harmonics of closed forms.
    pub tau_grid: usize,
    /// Override of the support edge for Gaussian-type coefficients.
    pub k_max: Option<f64>,
    /// Repeat with 1.5x nodes and report disagreement above `check_tol`.
    pub check: bool,
    pub check_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            k_nodes: 400,
            tau_grid: 256,
            k_max: None,
            check: false,
            check_tol: 1e-8,
        }
    }
}

/// Lab-frame harmonics `G_h` of a drive on `dim` Fock levels.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameHamiltonian {
    pub dim: usize,
    pub g: BTreeMap<i32, CMat>,
}

impl FrameHamiltonian {
    pub fn zeros(dim: usize) -> FrameHamiltonian {
        FrameHamiltonian {
            dim,
            g: BTreeMap::new(),
        }
    }

    pub fn from_coefficient(f: &NcftCoefficient, params: &SystemParams, quad: &QuadConfig) -> Result<FrameHamiltonian> {
        let fr = build(f, params, quad, 1.0)?;
        if quad.check && !matches!(f, NcftCoefficient::Lines(_)) {
            let fine = build(f, params, quad, 1.5)?;
            let scale = fine.g.values().map(max_abs).fold(0.0, f64::max).max(1e-300);
            let diff = fr.add(&fine, -1.0).g.values().map(max_abs).fold(0.0, f64::max);
            if diff > quad.check_tol * scale {
                return Err(Error::Convergence {
                    module: "ncft",
                    msg: format!("k quadrature unconverged: relative change {:.2e} under 1.5x nodes", diff / scale),
                });
            }
            return Ok(fine.pruned(1e-15));
        }
        Ok(fr.pruned(1e-15))
    }

    /// `H(tau) = Rot(tau)^dag G(tau) Rot(tau)`.
    pub fn eval(&self, tau: f64) -> FockOperator {
        let n = self.dim;
        let mut gt = CMat::zeros(n, n);
        {
            let dst = gt.as_mut_slice();
            for (&h, gh) in &self.g {
                let p = cis(h as f64 * tau);
                for (d, s) in dst.iter_mut().zip(gh.as_slice()) {
                    *d += s * p;
                }
            }
        }
        let rot: Vec<C64> = (0..n).map(|a| cis(a as f64 * tau)).collect();
        for b in 0..n {
            let rb = rot[b].conj();
            for (a, z) in gt.column_mut(b).iter_mut().enumerate() {
                *z *= rot[a] * rb;
            }
        }
        gt
    }

    /// Drop harmonics whose entries all sit below `rel` times the largest entry.
    pub fn pruned(mut self, rel: f64) -> FrameHamiltonian {
        let scale = self.g.values().map(max_abs).fold(0.0, f64::max);
        self.g.retain(|_, m| max_abs(m) > rel * scale);
        self
    }

    /// Rotating-frame harmonic `H_l`.
    pub fn harmonic(&self, l: i32) -> FockOperator {
        let n = self.dim;
        CMat::from_fn(n, n, |a, b| {
            let h = l + b as i32 - a as i32;
            self.g.get(&h).map(|m| m[(a, b)]).unwrap_or_default()
        })
    }

    pub fn scaled(&self, s: f64) -> FrameHamiltonian {
        FrameHamiltonian {
            dim: self.dim,
            g: self.g.iter().map(|(&h, m)| (h, m * c(s, 0.0))).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add(&self, other: &FrameHamiltonian, s: f64) -> FrameHamiltonian {
        assert_eq!(self.dim, other.dim, "frame dimensions differ");
        let mut g = self.g.clone();
        for (&h, m) in &other.g {
            let e = g.entry(h).or_insert_with(|| CMat::zeros(self.dim, self.dim));
            *e += m * c(s, 0.0);
        }
        FrameHamiltonian { dim: self.dim, g }
    }

    /// Drive advanced by `tau0`: `H(tau) -> H(tau + tau0)`, i.e. `H_l -> H_l e^{il tau0}`.
    pub fn time_shifted(&self, tau0: f64) -> FrameHamiltonian {
        let n = self.dim;
        let g = self
            .g
            .iter()
            .map(|(&h, m)| {
                let shifted = CMat::from_fn(n, n, |a, b| {
                    m[(a, b)] * cis((h as f64 - (b as f64 - a as f64)) * tau0)
                });
                (h, shifted)
            })
            .collect();
        FrameHamiltonian { dim: n, g }
    }

    /// Largest `|l|` with a nonzero rotating-frame harmonic.
    pub fn max_harmonic(&self) -> usize {
        self.g.keys().map(|h| h.unsigned_abs() as usize).max().unwrap_or(0) + self.dim - 1
    }
}

fn k_nodes(support: &KSupport, quad: &QuadConfig, dim: usize, refine: f64) -> Vec<(f64, f64)> {
    let total = ((quad.k_nodes as f64) * refine).ceil() as usize;
    match support {
        KSupport::Discrete => Vec::new(),
        KSupport::Gaussian { k_max } => {
            let km = quad.k_max.unwrap_or(*k_max);
            // the Fock-backed integrand carries ~2*dim oscillations per half line
            let half = (total / 2).max(((2 * dim + 100) as f64 * refine) as usize);
            let (x, w) = gauss_legendre_on(half, 0.0, km);
            let mut out: Vec<(f64, f64)> = x.iter().zip(&w).map(|(&k, &w)| (-k, w)).collect();
            out.extend(x.iter().zip(&w).map(|(&k, &w)| (k, w)));
            out
        }
        KSupport::Compact { edges } => {
            // k = mid + half cos(phi) on every segment absorbs the square-root
            // behaviour at both ends of each segment
            let segs = edges.len().saturating_sub(1).max(1);
            let per = (total / (2 * segs)).max(16);
            let (phi, wphi) = gauss_legendre_on(per, 0.0, PI);
            let mut out = Vec::new();
            for win in edges.windows(2) {
                let (lo, hi) = (win[0], win[1]);
                if hi - lo < 1e-14 {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                let hw = 0.5 * (hi - lo);
                for (p, wp) in phi.iter().zip(&wphi) {
                    let k = mid + hw * p.cos();
                    let w = wp * hw * p.sin();
                    out.push((k, w));
                    out.push((-k, w));
                }
            }
            out
        }
    }
}

fn dft_harmonics(f: &NcftCoefficient, k: f64, m: usize) -> Vec<C64> {
    let mut buf: Vec<C64> = (0..m)
        .map(|j| f.eval(k, 2.0 * PI * j as f64 / m as f64))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    buf.iter().map(|z| z / m as f64).collect()
}

fn build(f: &NcftCoefficient, params: &SystemParams, quad: &QuadConfig, refine: f64) -> Result<FrameHamiltonian> {
    let n = params.n_fock;
    let mut fr = FrameHamiltonian::zeros(n);
    match f {
        NcftCoefficient::Lines(set) => {
            for line in &set.lines {
                if line.k == 0.0 {
                    continue;
                }
                let d = planewave_matrix(line.k, 0.0, params.lambda, n);
                for (&h, &w) in &line.harmonics {
                    let e = fr.g.entry(h).or_insert_with(|| CMat::zeros(n, n));
                    *e += &d * (c(w[0], w[1]) * (0.5 * line.k.abs()));
                }
            }
            return Ok(fr);
        }
        NcftCoefficient::Fock(fb) => {
            let nodes = k_nodes(&f.support(), quad, n.max(fb.dim()), refine);
            let hs = fb.harmonic_indices(1e-14 * max_abs(&fb.coeffs).max(1e-300));
            let vals: Vec<Vec<C64>> = nodes
                .par_iter()
                .map(|&(k, _)| {
                    let th = fb.tau_harmonics(k);
                    hs.iter().map(|h| th.get(h).copied().unwrap_or_default()).collect()
                })
                .collect();
            accumulate(&mut fr, &hs, &nodes, &vals, params.lambda);
        }
        NcftCoefficient::Closed(cf) => {
            let nodes = k_nodes(&f.support(), quad, n, refine);
            let m = quad.tau_grid;
            let (hs, vals): (Vec<i32>, Vec<Vec<C64>>) = if cf.tau_harmonics(0.0).is_some() {
                let maps: Vec<_> = nodes
                    .par_iter()
                    .map(|&(k, _)| cf.tau_harmonics(k).unwrap())
                    .collect();
                let hs: Vec<i32> = maps[0].keys().copied().collect();
                let vals = maps
                    .iter()
                    .map(|mp| hs.iter().map(|h| mp[h]).collect())
                    .collect();
                (hs, vals)
            } else {
                let spectra: Vec<Vec<C64>> = nodes.par_iter().map(|&(k, _)| dft_harmonics(f, k, m)).collect();
                let half = (m / 2) as i32;
                let idx = |h: i32| if h >= 0 { h as usize } else { (m as i32 + h) as usize };
                let peak = spectra
                    .iter()
                    .flat_map(|s| s.iter().map(|z| z.norm()))
                    .fold(0.0, f64::max);
                let hs: Vec<i32> = (-half + 1..half)
                    .filter(|&h| spectra.iter().any(|s| s[idx(h)].norm() > 1e-14 * peak))
                    .collect();
                let vals = spectra
                    .iter()
                    .map(|s| hs.iter().map(|&h| s[idx(h)]).collect())
                    .collect();
                (hs, vals)
            };
            accumulate(&mut fr, &hs, &nodes, &vals, params.lambda);
        }
    }
    Ok(fr)
}

/// `G_h += sum_nodes w |k|/2 f_h(k) D(k,0)` as a chunked real GEMM.
fn accumulate(fr: &mut FrameHamiltonian, hs: &[i32], nodes: &[(f64, f64)], vals: &[Vec<C64>], lambda: f64) {
    let n = fr.dim;
    let nn = n * n;
    let nh = hs.len();
    if nh == 0 || nodes.is_empty() {
        return;
    }
    let mut acc_re = DMatrix::<f64>::zeros(nh, nn);
    let mut acc_im = DMatrix::<f64>::zeros(nh, nn);
    const CHUNK: usize = 64;
    for start in (0..nodes.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(nodes.len());
        let kc = end - start;
        let mut fr_re = DMatrix::<f64>::zeros(nh, kc);
        let mut fr_im = DMatrix::<f64>::zeros(nh, kc);
        for (j, i) in (start..end).enumerate() {
            let (k, w) = nodes[i];
            let s = w * 0.5 * k.abs();
            for (hi, v) in vals[i].iter().enumerate() {
                fr_re[(hi, j)] = v.re * s;
                fr_im[(hi, j)] = v.im * s;
            }
        }
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let k = nodes[i].0;
                let g = laguerre_function_table(0.5 * lambda * k * k, n);
                let mut re = vec![0.0; nn];
                let mut im = vec![0.0; nn];
                for b in 0..n {
                    for a in 0..n {
                        let (lo, d) = if a <= b { (a, b - a) } else { (b, a - b) };
                        let z = i_sgn_pow(k, d) * g[d][lo];
                        re[a + b * n] = z.re;
                        im[a + b * n] = z.im;
                    }
                }
                (re, im)
            })
            .collect();
        let mut d_re = DMatrix::<f64>::zeros(kc, nn);
        let mut d_im = DMatrix::<f64>::zeros(kc, nn);
        for (j, (re, im)) in rows.iter().enumerate() {
            for idx in 0..nn {
                d_re[(j, idx)] = re[idx];
                d_im[(j, idx)] = im[idx];
            }
        }
        acc_re += &fr_re * &d_re - &fr_im * &d_im;
        acc_im += &fr_re * &d_im + &fr_im * &d_re;
    }
    for (hi, &h) in hs.iter().enumerate() {
        let m = CMat::from_fn(n, n, |a, b| C64::new(acc_re[(hi, a + b * n)], acc_im[(hi, a + b * n)]));
        let e = fr.g.entry(h).or_insert_with(|| CMat::zeros(n, n));
        *e += m;
    }
}

/// `H(t)` for a drive coefficient at time `t`.
pub fn rotating_frame_hamiltonian(f: &NcftCoefficient, t: f64, params: &SystemParams, quad: &QuadConfig) -> Result<FockOperator> {
    Ok(FrameHamiltonian::from_coefficient(f, params, quad)?.eval(params.omega * t))
}

/// Operator with coefficient `f`: the time average (`l = 0` harmonic) of
/// the rotating-frame Hamiltonian.
pub fn inverse_ncft(f: &NcftCoefficient, params: &SystemParams, quad: &QuadConfig) -> Result<FockOperator> {
    Ok(FrameHamiltonian::from_coefficient(f, params, quad)?.harmonic(0))
}
