//! Quasienergy eigenproblem on the composite Fock x temporal space,
//! micromotion, time-ordered propagators and fidelity metrics.

use crate::error::{invalid, Error, Result};
use crate::fockspace::{cat_state, FockOperator, FockState, SystemParams};
use crate::linalg::{c, cis, eigh, hermitian_deviation, max_abs, CMat, CVec, C64};
use crate::ncft::FrameHamiltonian;

mod propagate;

pub use propagate::{
    evolve, evolve_states, propagate_states, propagator, Integrator, PropagatedStates, PropagatorConfig,
    PropagatorResult,
};

pub const DEFAULT_M_MAX: usize = 10;
pub const MAX_COMPOSITE_DIM: usize = 20000;

/// Quasienergies and Floquet modes. Column `alpha` of `modes` holds
/// `c^{m,M}` at row `(M + m_max) * dim + m`.
#[derive(Clone, Debug)]
pub struct QuasienergySolution {
    /// Folded into `(-lambda Omega/2, lambda Omega/2]`.
    pub epsilon: Vec<f64>,
    /// Eigenvalues of the truncated quasienergy matrix, ascending.
    pub raw: Vec<f64>,
    pub modes: CMat,
    pub dim: usize,
    pub m_max: usize,
    pub params: SystemParams,
}

impl QuasienergySolution {
    pub fn len(&self) -> usize {
        self.epsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilon.is_empty()
    }

    pub fn coefficient(&self, alpha: usize, m: usize, big_m: i32) -> C64 {
        let row = (big_m + self.m_max as i32) as usize * self.dim + m;
        self.modes[(row, alpha)]
    }

    /// Weight of mode `alpha` in each temporal sector `M = -m_max..=m_max`.
    pub fn sector_weights(&self, alpha: usize) -> Vec<f64> {
        let col = self.modes.column(alpha);
        (0..2 * self.m_max + 1)
            .map(|s| col.rows(s * self.dim, self.dim).norm_squared())
            .collect()
    }

    /// Modes whose heaviest temporal sector is `M = 0`: one representative
    /// per physical Floquet state, away from the truncation edge in `M`.
    pub fn central(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| {
                let w = self.sector_weights(a);
                let best = w
                    .iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                best == self.m_max
            })
            .collect()
    }
}

/// Fold an energy into the zone `(-lambda Omega/2, lambda Omega/2]`.
pub fn fold_quasienergy(e: f64, lambda: f64, omega: f64) -> f64 {
    let w = lambda * omega;
    let mut f = e - w * (e / w).round();
    if f <= -0.5 * w {
        f += w;
    } else if f > 0.5 * w {
        f -= w;
    }
    f
}

/// Circular distance between two quasienergies.
pub fn quasienergy_distance(a: f64, b: f64, lambda: f64, omega: f64) -> f64 {
    fold_quasienergy(a - b, lambda, omega).abs()
}

/// Matrix of `H(t) - i lambda d/dt` on `|m> (x) |e^{iM Omega t}>`: block
/// `(M1, M2)` is `H_{M1-M2}`, plus `lambda (Omega M1 + detuning m)` on the diagonal.
pub fn quasienergy_matrix(
    frame: &FrameHamiltonian,
    m_max: usize,
    detuning: f64,
    params: &SystemParams,
) -> Result<CMat> {
    if m_max < 1 {
        return Err(invalid("floquet_solver", "m_max", "must be >= 1"));
    }
    let n = frame.dim;
    let sectors = 2 * m_max + 1;
    let dim = n * sectors;
    if dim > MAX_COMPOSITE_DIM {
        return Err(Error::DimensionOverflow {
            dim,
            limit: MAX_COMPOSITE_DIM,
        });
    }
    let harmonics: Vec<FockOperator> = (-2 * m_max as i32..=2 * m_max as i32)
        .map(|l| frame.harmonic(l))
        .collect();
    let mut q = CMat::zeros(dim, dim);
    for s1 in 0..sectors {
        for s2 in 0..sectors {
            let h = &harmonics[(s1 as i32 - s2 as i32 + 2 * m_max as i32) as usize];
            q.view_mut((s1 * n, s2 * n), (n, n)).copy_from(h);
        }
        let big_m = s1 as f64 - m_max as f64;
        for m in 0..n {
            q[(s1 * n + m, s1 * n + m)] += c(params.lambda * (params.omega * big_m + detuning * m as f64), 0.0);
        }
    }
    let dev = hermitian_deviation(&q);
    if dev > 1e-10 * max_abs(&q).max(1.0) {
        return Err(Error::Convergence {
            module: "floquet_solver",
            msg: format!("quasienergy matrix not Hermitian: deviation {dev:.2e}"),
        });
    }
    Ok(q)
}

pub fn quasienergy_solve(frame: &FrameHamiltonian, m_max: usize, params: &SystemParams) -> Result<QuasienergySolution> {
    quasienergy_solve_detuned(frame, m_max, 0.0, params)
}

/// As [`quasienergy_solve`] with a rotating-frame detuning `lambda * detuning * a^dag a`.
pub fn quasienergy_solve_detuned(
    frame: &FrameHamiltonian,
    m_max: usize,
    detuning: f64,
    params: &SystemParams,
) -> Result<QuasienergySolution> {
    let q = quasienergy_matrix(frame, m_max, detuning, params)?;
    let (raw, modes) = eigh(&q);
    let epsilon = raw
        .iter()
        .map(|&e| fold_quasienergy(e, params.lambda, params.omega))
        .collect();
    Ok(QuasienergySolution {
        epsilon,
        raw,
        modes,
        dim: frame.dim,
        m_max,
        params: params.clone(),
    })
}

/// `Phi^m(t) = sum_M c^{m,M} e^{iM Omega t}`, normalized.
pub fn micromotion(sol: &QuasienergySolution, alpha: usize, t: f64) -> Result<FockState> {
    if alpha >= sol.len() {
        return Err(invalid("floquet_solver", "alpha_index", format!("{alpha} out of range")));
    }
    let n = sol.dim;
    let col = sol.modes.column(alpha);
    let mut v = CVec::zeros(n);
    for s in 0..2 * sol.m_max + 1 {
        let big_m = s as f64 - sol.m_max as f64;
        let ph = cis(big_m * sol.params.omega * t);
        v += col.rows(s * n, n) * ph;
    }
    let norm = v.norm();
    if norm < 1e-300 {
        return Err(Error::Domain {
            module: "floquet_solver",
            msg: format!("micromotion of mode {alpha} vanishes at t = {t}"),
        });
    }
    Ok(FockState { amps: v / c(norm, 0.0) })
}

/// A Floquet mode matched to a reference state.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedLevel {
    pub index: usize,
    pub quasienergy: f64,
    /// `|<reference|Phi(t)>|`.
    pub overlap: f64,
    pub state: FockState,
}

/// Micromotion snapshots at `t` of the central modes, with their indices.
pub fn central_snapshots(sol: &QuasienergySolution, t: f64) -> Result<(Vec<usize>, Vec<FockState>)> {
    let cand = sol.central();
    let snaps = cand
        .iter()
        .map(|&a| micromotion(sol, a, t))
        .collect::<Result<Vec<_>>>()?;
    Ok((cand, snaps))
}

/// Assign each reference a distinct candidate by largest `|<ref|cand>|`,
/// greedily over all pairs. Returns `(candidate position, overlap)`.
pub fn greedy_match(refs: &[FockState], cands: &[FockState]) -> Result<Vec<(usize, f64)>> {
    if cands.len() < refs.len() {
        return Err(Error::Domain {
            module: "floquet_solver",
            msg: format!("{} candidate modes for {} references", cands.len(), refs.len()),
        });
    }
    let mut pairs = Vec::with_capacity(refs.len() * cands.len());
    for (r, rs) in refs.iter().enumerate() {
        for (j, s) in cands.iter().enumerate() {
            if rs.dim() != s.dim() {
                return Err(invalid("floquet_solver", "refs", "reference dimension differs from the modes"));
            }
            pairs.push((rs.inner(s).norm(), r, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<Option<(usize, f64)>> = vec![None; refs.len()];
    let mut used = vec![false; cands.len()];
    for (ov, r, j) in pairs {
        if out[r].is_none() && !used[j] {
            used[j] = true;
            out[r] = Some((j, ov));
        }
    }
    Ok(out.into_iter().map(|x| x.expect("every reference assigned")).collect())
}

/// Match each reference state to a distinct central mode by the overlap of
/// its micromotion snapshot at `t`.
pub fn track_levels(sol: &QuasienergySolution, refs: &[FockState], t: f64) -> Result<Vec<TrackedLevel>> {
    let (cand, snaps) = central_snapshots(sol, t)?;
    Ok(greedy_match(refs, &snaps)?
        .into_iter()
        .map(|(j, overlap)| TrackedLevel {
            index: cand[j],
            quasienergy: sol.epsilon[cand[j]],
            overlap,
            state: snaps[j].clone(),
        })
        .collect())
}

/// Lowest, highest, second lowest and second highest eigenpairs of `h`:
/// the chiral pairs `(0, 0')` and `(I, I')`.
pub fn selected_levels(h: &FockOperator) -> (Vec<f64>, Vec<FockState>) {
    let (vals, vecs) = eigh(h);
    let n = vals.len();
    let pick = [0, n - 1, 1, n - 2];
    let e = pick.iter().map(|&i| vals[i]).collect();
    let s = pick
        .iter()
        .map(|&i| FockState {
            amps: vecs.column(i).into_owned(),
        })
        .collect();
    (e, s)
}

pub const LEVEL_LABELS: [&str; 4] = ["0", "0'", "I", "I'"];

/// `|<a|b>|`.
pub fn state_fidelity(a: &FockState, b: &FockState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(invalid("floquet_solver", "b", "state dimensions differ"));
    }
    Ok(a.inner(b).norm())
}

/// `|<m|a>| - |<m|b>|` for every `m`.
pub fn amplitude_profile_delta(a: &FockState, b: &FockState) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(invalid("floquet_solver", "b", "state dimensions differ"));
    }
    Ok(a.amps.iter().zip(b.amps.iter()).map(|(x, y)| x.norm() - y.norm()).collect())
}

/// The `q` cat states `s = 0..q-1` on `n` levels.
pub fn cat_basis(q: usize, alpha: f64, n: usize) -> Result<Vec<FockState>> {
    (0..q).map(|s| cat_state(q, s, c(alpha, 0.0), n)).collect()
}

/// `(1/q) sum_s |<psi_s|U|psi_s>|` over the cat states.
pub fn fidelity_cats(u: &FockOperator, q: usize, alpha: f64, n: usize) -> Result<f64> {
    if u.nrows() != n || u.ncols() != n {
        return Err(invalid("floquet_solver", "U", format!("expected {n}x{n}")));
    }
    let cats = cat_basis(q, alpha, n)?;
    let evolved: Vec<FockState> = cats
        .iter()
        .map(|s| FockState { amps: u * &s.amps })
        .collect();
    Ok(return_fidelity(&cats, &evolved))
}

/// `(1/len) sum_j |<before_j|after_j>|`, clamped to `[0, 1]`.
pub fn return_fidelity(before: &[FockState], after: &[FockState]) -> f64 {
    let s: f64 = before.iter().zip(after).map(|(a, b)| a.inner(b).norm()).sum();
    (s / before.len() as f64).clamp(0.0, 1.0)
}

/// Quasienergies `-(lambda/T) arg(e^{i phi})` from unitary eigenphases.
pub fn eigenphase_quasienergies(phases: &[f64], params: &SystemParams) -> Vec<f64> {
    let t = params.period();
    phases
        .iter()
        .map(|&p| fold_quasienergy(-params.lambda / t * p, params.lambda, params.omega))
        .collect()
}

#[cfg(test)]
mod tests;
