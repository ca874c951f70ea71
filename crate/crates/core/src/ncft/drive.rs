//! Real-space drives `V(x,t) = int_0^inf A(k,t) cos(kx + phi(k,t)) dk`.

use super::{unpair, KSupport, NcftCoefficient, Pair, QuadConfig};
use crate::error::Result;
use crate::fockspace::SystemParams;
use crate::linalg::{cis, C64};
use crate::quadrature::gauss_legendre_on;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Line at `k > 0`; its amplitude at time `t` is `k |w(Omega t)|` and its
/// phase `arg w(Omega t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpecLine {
    pub k: f64,
    pub harmonics: BTreeMap<i32, Pair>,
}

impl DriveSpecLine {
    fn weight(&self, tau: f64) -> C64 {
        self.harmonics
            .iter()
            .map(|(&h, &w)| unpair(w) * cis(h as f64 * tau))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveSpec {
    Lines {
        omega: f64,
        lines: Vec<DriveSpecLine>,
    },
    /// `amplitude[i][j]`, `phase[i][j]` at `(k[i], t[j])`; `t` is a uniform
    /// grid over one period and `k_weights` integrates over `[0, k_max]`.
    Grid {
        omega: f64,
        k: Vec<f64>,
        k_weights: Vec<f64>,
        t: Vec<f64>,
        amplitude: Vec<Vec<f64>>,
        phase: Vec<Vec<f64>>,
    },
}

/// Amplitude/phase form of a hermiticity-closed coefficient. Lines keep
/// only their `k > 0` members (the `k < 0` partners are implied); other
/// coefficients are sampled on Gauss-Legendre nodes in `k` and a uniform
/// `quad.tau_grid` grid in `t`.
pub fn synth_drive(f: &NcftCoefficient, params: &SystemParams, quad: &QuadConfig) -> Result<DriveSpec> {
    let omega = params.omega;
    if let NcftCoefficient::Lines(set) = f {
        let lines = set
            .lines
            .iter()
            .filter(|l| l.k > 0.0)
            .map(|l| DriveSpecLine {
                k: l.k,
                harmonics: l.harmonics.clone(),
            })
            .collect();
        return Ok(DriveSpec::Lines { omega, lines });
    }
    let k_max = match f.support() {
        KSupport::Gaussian { k_max } => quad.k_max.unwrap_or(k_max),
        KSupport::Compact { edges } => edges.last().copied().unwrap_or(0.0),
        KSupport::Discrete => 0.0,
    };
    let (k, k_weights) = gauss_legendre_on(quad.k_nodes.max(2), 0.0, k_max);
    let m = quad.tau_grid.max(4);
    let period = 2.0 * PI / omega;
    let t: Vec<f64> = (0..m).map(|j| period * j as f64 / m as f64).collect();
    let mut amplitude = Vec::with_capacity(k.len());
    let mut phase = Vec::with_capacity(k.len());
    for &kk in &k {
        let (a, p): (Vec<f64>, Vec<f64>) = t
            .iter()
            .map(|&tt| {
                let z = f.eval(kk, omega * tt);
                ((kk * z).norm(), z.arg())
            })
            .unzip();
        amplitude.push(a);
        phase.push(p);
    }
    Ok(DriveSpec::Grid {
        omega,
        k,
        k_weights,
        t,
        amplitude,
        phase,
    })
}

/// Band-limited interpolation of uniform periodic samples at fraction `s` of the period.
fn trig_interp(samples: &[C64], s: f64) -> C64 {
    let m = samples.len();
    let half = (m / 2) as i64;
    let mut out = C64::default();
    for h in -half + 1..half {
        let coeff: C64 = samples
            .iter()
            .enumerate()
            .map(|(j, z)| z * cis(-2.0 * PI * (h * j as i64) as f64 / m as f64))
            .sum::<C64>()
            / m as f64;
        out += coeff * cis(2.0 * PI * h as f64 * s);
    }
    out
}

/// `V(x, t)`.
pub fn drive_potential(spec: &DriveSpec, x: f64, t: f64) -> f64 {
    match spec {
        DriveSpec::Lines { omega, lines } => lines
            .iter()
            .map(|l| l.k * (l.weight(omega * t) * cis(l.k * x)).re)
            .sum(),
        DriveSpec::Grid {
            omega,
            k,
            k_weights,
            amplitude,
            phase,
            ..
        } => {
            let s = (omega * t / (2.0 * PI)).rem_euclid(1.0);
            k.iter()
                .zip(k_weights)
                .enumerate()
                .map(|(i, (&kk, &w))| {
                    let z: Vec<C64> = amplitude[i]
                        .iter()
                        .zip(&phase[i])
                        .map(|(&a, &p)| cis(p) * a)
                        .collect();
                    w * (trig_interp(&z, s) * cis(kk * x)).re
                })
                .sum()
        }
    }
}

impl DriveSpec {
    /// CSV rows `(k, t, amplitude, phase)`. Line drives are sampled on the
    /// `t` grid of `n_t` points.
    pub fn write_csv<W: Write>(&self, w: W, n_t: usize) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "t", "amplitude", "phase"])?;
        match self {
            DriveSpec::Lines { omega, lines } => {
                let period = 2.0 * PI / omega;
                for l in lines {
                    for j in 0..n_t {
                        let t = period * j as f64 / n_t as f64;
                        let z = l.weight(omega * t);
                        wr.serialize((l.k, t, l.k * z.norm(), z.arg()))?;
                    }
                }
            }
            DriveSpec::Grid {
                k,
                t,
                amplitude,
                phase,
                ..
            } => {
                for (i, &kk) in k.iter().enumerate() {
                    for (j, &tt) in t.iter().enumerate() {
                        wr.serialize((kk, tt, amplitude[i][j], phase[i][j]))?;
                    }
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, n_t: usize) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?, n_t)
    }

    /// JSON list `[{k, harmonics: {l: [re, im]}}]`; `None` for grid drives.
    pub fn lines_json(&self) -> Option<String> {
        match self {
            DriveSpec::Lines { lines, .. } => serde_json::to_string_pretty(lines).ok(),
            DriveSpec::Grid { .. } => None,
        }
    }
}
