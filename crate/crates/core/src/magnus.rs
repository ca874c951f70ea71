//! Floquet-Magnus terms in the rotating frame and the correction-drive loop.
//!
//! Conventions: `H(t) = sum_l H_l e^{il Omega t}`, one period starts at `t0`
//! and `U(t0 + T, t0) = exp(-i T H_F / lambda)`.

use crate::error::{Error, Result};
use crate::fockspace::{FockOperator, SystemParams};
use crate::linalg::{c, cis, commutator, hermitian_deviation, max_abs, CMat};
use crate::ncft::{
    ncft_forward, FrameHamiltonian, LineBracket, NcftCoefficient, QuadConfig,
};
use crate::ncft::ClosedForm;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_L_MAX: usize = 10;

/// Rotating-frame harmonics `H_l`, `|l| <= l_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSet {
    pub l_max: usize,
    pub table: BTreeMap<i32, FockOperator>,
}

impl HarmonicSet {
    pub fn dim(&self) -> usize {
        self.table.values().next().map(|m| m.nrows()).unwrap_or(0)
    }

    /// `H_l`, zero outside the table.
    pub fn get(&self, l: i32) -> FockOperator {
        let n = self.dim();
        self.table.get(&l).cloned().unwrap_or_else(|| CMat::zeros(n, n))
    }

    pub fn from_frame(fr: &FrameHamiltonian, l_max: usize) -> HarmonicSet {
        let lm = l_max as i32;
        HarmonicSet {
            l_max,
            table: (-lm..=lm).map(|l| (l, fr.harmonic(l))).collect(),
        }
    }

    /// Build from `H_l`, `l >= 0`; negative harmonics are the adjoints.
    pub fn from_nonnegative(h: &[FockOperator]) -> HarmonicSet {
        let mut table = BTreeMap::new();
        for (l, m) in h.iter().enumerate() {
            table.insert(l as i32, m.clone());
            if l > 0 {
                table.insert(-(l as i32), m.adjoint());
            }
        }
        HarmonicSet {
            l_max: h.len().saturating_sub(1),
            table,
        }
    }

    /// `max_l ||H_{-l} - H_l^dag||_max`.
    pub fn conjugation_defect(&self) -> f64 {
        self.table
            .iter()
            .map(|(&l, m)| max_abs(&(self.get(-l) - m.adjoint())))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> HarmonicSet {
        HarmonicSet {
            l_max: self.l_max,
            table: self.table.iter().map(|(&l, m)| (l, m * c(s, 0.0))).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add(&self, other: &HarmonicSet, s: f64) -> HarmonicSet {
        let mut table = self.table.clone();
        for (&l, m) in &other.table {
            match table.get_mut(&l) {
                Some(e) => *e += m * c(s, 0.0),
                None => {
                    table.insert(l, m * c(s, 0.0));
                }
            }
        }
        HarmonicSet {
            l_max: self.l_max.max(other.l_max),
            table,
        }
    }
}

/// Rotating-frame harmonics of a drive, `V_l = (1/T) int H(t) e^{-il Omega t} dt`.
pub fn extract_harmonics(f: &NcftCoefficient, l_max: usize, params: &SystemParams, quad: &QuadConfig) -> Result<HarmonicSet> {
    if l_max < 1 {
        return Err(crate::error::invalid("magnus", "l_max", "must be >= 1"));
    }
    if quad.tau_grid < 8 * l_max {
        return Err(Error::Aliasing {
            l_max,
            grid: quad.tau_grid,
            need: 8 * l_max,
        });
    }
    let fr = FrameHamiltonian::from_coefficient(f, params, quad)?;
    Ok(HarmonicSet::from_frame(&fr, l_max))
}

fn lw(params: &SystemParams) -> f64 {
    params.lambda * params.omega
}

/// First-order term
/// `(1/(lambda Omega)) sum_{l>=1} [ (1/l)[H_l,H_-l] + (1/l)[H_-l,H_0] e^{-il Omega t0} + h.c. of the last ]`.
///
/// The phase carries `e^{-il Omega t0}`: with it a shift `H_l -> H_l e^{-il Omega t0}`
/// removes the reference-time dependence, as required by the shift covariance
/// of the full expansion.
pub fn magnus_first_order(h: &HarmonicSet, params: &SystemParams) -> FockOperator {
    let n = h.dim();
    let h0 = h.get(0);
    let wt0 = params.omega * params.t0;
    let terms: Vec<CMat> = (1..=h.l_max as i32)
        .into_par_iter()
        .map(|l| {
            let hp = h.get(l);
            let hm = h.get(-l);
            let a = commutator(&hp, &hm);
            let b = commutator(&hm, &h0) * cis(-(l as f64) * wt0);
            (a + &b + b.adjoint()) * c(1.0 / l as f64, 0.0)
        })
        .collect();
    let mut out = CMat::zeros(n, n);
    for t in terms {
        out += t;
    }
    out * c(1.0 / lw(params), 0.0)
}

/// Standard second-order term of a single drive, written as the sum of
/// nested commutators in the rotating-frame harmonics. Each phase factor
/// `e^{il Omega t0}` of the expansion is taken with the sign that makes the
/// result covariant under `H_l -> H_l e^{-il Omega t0}`.
pub fn magnus_second_order_single(h: &HarmonicSet, params: &SystemParams) -> FockOperator {
    let n = h.dim();
    let lm = h.l_max as i32;
    let wt0 = params.omega * params.t0;
    let v0 = h.get(0);
    let ph = |l: i32| cis(-(l as f64) * wt0);
    let ls: Vec<i32> = (-lm..=lm).filter(|&l| l != 0).collect();
    let terms: Vec<CMat> = ls
        .par_iter()
        .map(|&l| {
            let lf = l as f64;
            let vl = h.get(l);
            let vml = h.get(-l);
            let mut acc = CMat::zeros(n, n);
            acc += commutator(&vml, &commutator(&v0, &vl)) * c(1.0 / (2.0 * lf * lf), 0.0);
            acc -= commutator(&v0, &commutator(&v0, &vml)) * (ph(l) / (lf * lf));
            // inner sums over l' run on the same truncated table
            let mut x3 = CMat::zeros(n, n); // sum_l' [V_-l', [V_l'-l, V_l]] / l'
            let mut x4 = CMat::zeros(n, n); // sum_l' [V_l', [V_-l', V_-l]] / l'
            let mut x5 = CMat::zeros(n, n); // sum_l' [V_l', V_-l'] / l'
            let mut x7 = CMat::zeros(n, n); // sum_l' V_-l' e^{.. l'} / l'
            for &lp in &ls {
                let lpf = lp as f64;
                let vlp = h.get(lp);
                let vmlp = h.get(-lp);
                if lp != l {
                    let vd = h.get(lp - l);
                    x3 += commutator(&vmlp, &commutator(&vd, &vl)) * c(1.0 / lpf, 0.0);
                }
                x4 += commutator(&vlp, &commutator(&vmlp, &vml)) * c(1.0 / lpf, 0.0);
                x5 += commutator(&vlp, &vmlp) * c(1.0 / lpf, 0.0);
                x7 += vmlp * (ph(lp) / lpf);
            }
            acc += x3 * c(1.0 / (3.0 * lf), 0.0);
            acc -= x4 * (ph(l) / (3.0 * lf));
            acc += commutator(&vml, &x5) * (ph(l) / (3.0 * lf));
            acc += commutator(&v0, &commutator(&x7, &vml)) * (ph(l) / (2.0 * lf));
            acc -= commutator(&x7, &commutator(&v0, &vml)) * (ph(l) / (2.0 * lf));
            acc
        })
        .collect();
    // [V_0, [V_{l'-l}, V_{-l'}]] / (2 l l'): l itself is not a harmonic
    // index here, so it runs over every value that keeps l' - l in the table
    let wide: Vec<i32> = (-2 * lm..=2 * lm).filter(|&l| l != 0).collect();
    let inner: Vec<CMat> = wide
        .par_iter()
        .map(|&l| {
            let mut x6 = CMat::zeros(n, n);
            for &lp in &ls {
                if lp != l && (lp - l).abs() <= lm {
                    x6 += commutator(&h.get(lp - l), &h.get(-lp)) * c(1.0 / lp as f64, 0.0);
                }
            }
            x6 * (ph(l) / (2.0 * l as f64))
        })
        .collect();
    let mut x6 = CMat::zeros(n, n);
    for t in inner {
        x6 += t;
    }
    let mut out = -commutator(&v0, &x6);
    for t in terms {
        out += t;
    }
    out * c(1.0 / (lw(params) * lw(params)), 0.0)
}

/// Second-order term with a first-order correction drive present:
/// the single-drive term of `h0` plus every bilinear cross term between
/// `h0` and `h1` from the first-order formula.
pub fn magnus_second_order(h0: &HarmonicSet, h1: &HarmonicSet, params: &SystemParams) -> FockOperator {
    let base = magnus_second_order_single(h0, params);
    if h1.table.values().all(|m| max_abs(m) == 0.0) {
        return base;
    }
    base + cross_first_order(h0, h1, params)
}

/// `B(a, b) + B(b, a)` where `B` is the bilinear form behind [`magnus_first_order`].
fn cross_first_order(a: &HarmonicSet, b: &HarmonicSet, params: &SystemParams) -> FockOperator {
    let n = a.dim();
    let wt0 = params.omega * params.t0;
    let lm = a.l_max.min(b.l_max) as i32;
    let mut out = CMat::zeros(n, n);
    for (x, y) in [(a, b), (b, a)] {
        let y0 = y.get(0);
        for l in 1..=lm {
            let t1 = commutator(&x.get(l), &y.get(-l));
            let t2 = commutator(&x.get(-l), &y0) * cis(-(l as f64) * wt0);
            out += (t1 + &t2 + t2.adjoint()) * c(1.0 / l as f64, 0.0);
        }
    }
    out * c(1.0 / lw(params), 0.0)
}

/// Which route produced a bracket coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketRoute {
    Analytic,
    Fock,
}

/// Coefficient of `[V_la(fa), V_lb(fb)]`: delta-root closed form for two
/// line sets, Fock commutator plus forward transform otherwise.
pub fn bracket_transform(
    fa: &NcftCoefficient,
    la: i32,
    fb: &NcftCoefficient,
    lb: i32,
    params: &SystemParams,
    quad: &QuadConfig,
) -> Result<(NcftCoefficient, BracketRoute)> {
    if let (NcftCoefficient::Lines(a), NcftCoefficient::Lines(b)) = (fa, fb) {
        let br = LineBracket {
            a: a.clone(),
            la,
            b: b.clone(),
            lb,
            lambda: params.lambda,
        };
        return Ok((NcftCoefficient::Closed(ClosedForm::LineBracket(br)), BracketRoute::Analytic));
    }
    let ha = FrameHamiltonian::from_coefficient(fa, params, quad)?.harmonic(la);
    let hb = FrameHamiltonian::from_coefficient(fb, params, quad)?.harmonic(lb);
    let comm = commutator(&ha, &hb);
    Ok((NcftCoefficient::Fock(ncft_forward(&comm, params)), BracketRoute::Fock))
}

/// One order of a correction stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveOrder {
    /// Formal order in `1/Omega`; also the extra power of `beta` it carries.
    pub order: u32,
    pub coefficient: NcftCoefficient,
}

impl DriveOrder {
    /// `+1` for the target drive, `-1` for corrections.
    pub fn sign(&self) -> f64 {
        if self.order == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Ordered drive coefficients `f^(0), f^(1), ...`; the physical drive is
/// `V = V^(0) - V^(1) - V^(2) ...` in terms of the potentials of each `f^(m)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveStack {
    pub orders: Vec<DriveOrder>,
}

impl DriveStack {
    pub fn single(f: NcftCoefficient) -> DriveStack {
        DriveStack {
            orders: vec![DriveOrder {
                order: 0,
                coefficient: f,
            }],
        }
    }

    /// Keep orders `<= m`.
    pub fn truncated(&self, m: u32) -> DriveStack {
        DriveStack {
            orders: self.orders.iter().filter(|o| o.order <= m).cloned().collect(),
        }
    }

    /// Frame Hamiltonian of the total drive.
    pub fn frame(&self, params: &SystemParams, quad: &QuadConfig) -> Result<FrameHamiltonian> {
        let mut fr = FrameHamiltonian::zeros(params.n_fock);
        for o in &self.orders {
            let part = FrameHamiltonian::from_coefficient(&o.coefficient, params, quad)?;
            fr = fr.add(&part, o.sign());
        }
        Ok(fr)
    }

    /// Frames of the individual orders, signs applied.
    pub fn order_frames(&self, params: &SystemParams, quad: &QuadConfig) -> Result<Vec<FrameHamiltonian>> {
        self.orders
            .iter()
            .map(|o| Ok(FrameHamiltonian::from_coefficient(&o.coefficient, params, quad)?.scaled(o.sign())))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<DriveStack> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The correction procedure: harmonics of the known drive, next Magnus
/// term, its transform as the next correction coefficient.
pub fn correction_loop(
    target: &NcftCoefficient,
    order_max: u32,
    l_max: usize,
    params: &SystemParams,
    quad: &QuadConfig,
) -> Result<DriveStack> {
    if !(1..=2).contains(&order_max) {
        return Err(crate::error::invalid("magnus", "order_max", "must be 1 or 2"));
    }
    let mut stack = DriveStack::single(target.clone());
    let h0 = extract_harmonics(target, l_max, params, quad)?;
    let hf1 = magnus_first_order(&h0, params);
    check_hermitian(&hf1, "first-order term")?;
    stack.orders.push(DriveOrder {
        order: 1,
        coefficient: NcftCoefficient::Fock(ncft_forward(&hf1, params)),
    });
    if order_max == 2 {
        let h1 = extract_harmonics(&stack.orders[1].coefficient, l_max, params, quad)?.scaled(-1.0);
        let hf2 = magnus_second_order(&h0, &h1, params);
        check_hermitian(&hf2, "second-order term")?;
        stack.orders.push(DriveOrder {
            order: 2,
            coefficient: NcftCoefficient::Fock(ncft_forward(&hf2, params)),
        });
    }
    Ok(stack)
}

fn check_hermitian(m: &CMat, what: &str) -> Result<()> {
    let dev = hermitian_deviation(m);
    let scale = max_abs(m).max(1.0);
    if dev > 1e-9 * scale {
        return Err(Error::Convergence {
            module: "magnus",
            msg: format!("{what} not Hermitian: deviation {dev:.2e}"),
        });
    }
    Ok(())
}
