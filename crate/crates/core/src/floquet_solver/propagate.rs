//! Time-ordered evolution over one drive period.

use crate::error::{invalid, Error, Result};
use crate::fockspace::{FockOperator, FockState, SystemParams};
use crate::linalg::{c, commutator, expm_herm, matmul, max_abs, CMat, CVec, I};
use crate::ncft::FrameHamiltonian;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Product of midpoint exponentials, second order.
    Midpoint,
    /// Two-node Gauss Magnus step, fourth order.
    #[default]
    Magnus4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    pub integrator: Integrator,
    pub steps: usize,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            integrator: Integrator::Magnus4,
            steps: 64,
            tol: 1e-9,
            max_steps: 1 << 14,
        }
    }
}

impl PropagatorConfig {
    fn validate(&self) -> Result<()> {
        if self.steps < 64 {
            return Err(invalid("floquet_solver", "steps", "must be >= 64"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("floquet_solver", "tol", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PropagatorResult {
    /// `U(t0 + T, t0)`.
    pub unitary: FockOperator,
    pub step_count: usize,
    /// Max-entry change under the last step doubling.
    pub convergence: f64,
    /// `max |U^dag U - 1|`.
    pub unitarity: f64,
}

/// Generator `K` of one step, `U_step = exp(-i K)`.
fn step_generator(frame: &FrameHamiltonian, ta: f64, h: f64, p: &SystemParams, integ: Integrator) -> CMat {
    let w = p.omega;
    match integ {
        Integrator::Midpoint => frame.eval(w * (ta + 0.5 * h)) * c(h / p.lambda, 0.0),
        Integrator::Magnus4 => {
            let d = h * 3f64.sqrt() / 6.0;
            let tc = ta + 0.5 * h;
            let h1 = frame.eval(w * (tc - d));
            let h2 = frame.eval(w * (tc + d));
            let k2 = commutator(&h2, &h1) * (-I * (3f64.sqrt() * h * h / (12.0 * p.lambda * p.lambda)));
            (h1 + h2) * c(0.5 * h / p.lambda, 0.0) + k2
        }
    }
}

/// `U(t1, t0)` with a fixed number of steps.
pub fn evolve(frame: &FrameHamiltonian, t0: f64, t1: f64, p: &SystemParams, steps: usize, integ: Integrator) -> CMat {
    let n = frame.dim;
    let h = (t1 - t0) / steps as f64;
    let mut u = CMat::identity(n, n);
    for j in 0..steps {
        let k = step_generator(frame, t0 + j as f64 * h, h, p, integ);
        u = matmul(&expm_herm(&k, 1.0), &u);
    }
    u
}

pub fn propagator(frame: &FrameHamiltonian, t0: f64, p: &SystemParams, cfg: &PropagatorConfig) -> Result<PropagatorResult> {
    cfg.validate()?;
    let t1 = t0 + p.period();
    let mut steps = cfg.steps;
    let mut prev = evolve(frame, t0, t1, p, steps, cfg.integrator);
    loop {
        if 2 * steps > cfg.max_steps {
            return Err(Error::Convergence {
                module: "floquet_solver",
                msg: format!("propagator unconverged at {steps} steps"),
            });
        }
        steps *= 2;
        let next = evolve(frame, t0, t1, p, steps, cfg.integrator);
        let diff = max_abs(&(&next - &prev));
        log::debug!("floquet_solver: {steps} steps, change {diff:.2e}");
        if diff <= cfg.tol {
            let n = frame.dim;
            let unitarity = max_abs(&(matmul(&next.adjoint(), &next) - CMat::identity(n, n)));
            if unitarity > 1e-9 {
                return Err(Error::Convergence {
                    module: "floquet_solver",
                    msg: format!("propagator lost unitarity: {unitarity:.2e}"),
                });
            }
            return Ok(PropagatorResult {
                unitary: next,
                step_count: steps,
                convergence: diff,
                unitarity,
            });
        }
        prev = next;
    }
}

/// `exp(-i K) V` by a Taylor series on sub-steps with `|K| <= 1`; the
/// columns of `V` are the states.
fn expm_action(k: &dyn Fn(&CMat) -> CMat, norm: f64, v: &CMat) -> CMat {
    let sub = norm.ceil().max(1.0) as usize;
    let s = c(0.0, -1.0 / sub as f64);
    let mut out = v.clone();
    for _ in 0..sub {
        let mut term = out.clone();
        let mut acc = out.clone();
        for j in 1..60 {
            term = k(&term) * (s / j as f64);
            acc += &term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
        }
        out = acc;
    }
    out
}

fn one_norm(m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Evolve state vectors from `t0` to `t1` with a fixed number of steps,
/// never forming the full propagator.
pub fn evolve_states(
    frame: &FrameHamiltonian,
    t0: f64,
    t1: f64,
    p: &SystemParams,
    steps: usize,
    integ: Integrator,
    states: &[CVec],
) -> Vec<CVec> {
    let h = (t1 - t0) / steps as f64;
    let n = frame.dim;
    let mut vs = CMat::from_fn(n, states.len(), |i, j| states[j][i]);
    for j in 0..steps {
        let k = step_generator(frame, t0 + j as f64 * h, h, p, integ);
        let nk = one_norm(&k);
        vs = expm_action(&|x: &CMat| &k * x, nk, &vs);
    }
    vs.column_iter().map(|col| col.into_owned()).collect()
}

#[derive(Clone, Debug)]
pub struct PropagatedStates {
    pub states: Vec<FockState>,
    pub step_count: usize,
    pub convergence: f64,
}

/// One period of evolution applied to `states`, with the same step
/// doubling as [`propagator`].
pub fn propagate_states(
    frame: &FrameHamiltonian,
    t0: f64,
    p: &SystemParams,
    states: &[FockState],
    cfg: &PropagatorConfig,
) -> Result<PropagatedStates> {
    cfg.validate()?;
    if states.iter().any(|s| s.dim() != frame.dim) {
        return Err(invalid("floquet_solver", "states", "dimension differs from the drive"));
    }
    let t1 = t0 + p.period();
    let init: Vec<CVec> = states.iter().map(|s| s.amps.clone()).collect();
    let mut steps = cfg.steps;
    let mut prev = evolve_states(frame, t0, t1, p, steps, cfg.integrator, &init);
    loop {
        if 2 * steps > cfg.max_steps {
            return Err(Error::Convergence {
                module: "floquet_solver",
                msg: format!("state propagation unconverged at {steps} steps"),
            });
        }
        steps *= 2;
        let next = evolve_states(frame, t0, t1, p, steps, cfg.integrator, &init);
        let diff = next
            .iter()
            .zip(&prev)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        if diff <= cfg.tol {
            return Ok(PropagatedStates {
                states: next.into_iter().map(|amps| FockState { amps }).collect(),
                step_count: steps,
                convergence: diff,
            });
        }
        prev = next;
    }
}
