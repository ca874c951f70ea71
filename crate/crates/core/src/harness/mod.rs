//! Experiment configs, parameter sweeps and CSV/JSON output.

mod config;
mod fit;
mod table;

pub use config::{CatSettings, Experiment, ExperimentConfig, Overrides, ParamsOverlay, QGrid, ResolvedConfig, Sweep};
pub use fit::{fit_loglog, sweet_spot_g, sweet_spot_roots, sweet_spot_solve};
pub use table::{Metadata, ResultTable};

use crate::analytic_example::{rwa_q_exact, rwa_target, MonoParams};
use crate::error::Result;
use crate::floquet_solver::{
    central_snapshots, cat_basis, fold_quasienergy, greedy_match, propagate_states, quasienergy_solve, return_fidelity,
    selected_levels, state_fidelity, track_levels, LEVEL_LABELS,
};
use crate::fockspace::{qfunction, FockState, SystemParams};
use crate::linalg::c;
use crate::magnus::{correction_loop, DriveOrder, DriveStack};
use crate::ncft::{
    ncft_cat_lattice, ncft_monochromatic, ClosedForm, FrameHamiltonian, LineFirstOrder, NcftCoefficient, QuadConfig,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

type Columns = Vec<(String, Vec<f64>)>;
/// `(dE_orig, dE_1st, F_orig, F_1st)` for the four tracked levels.
type LevelRow = ([f64; 4], [f64; 4], [f64; 4], [f64; 4]);

/// Column-name suffixes of the tracked levels.
pub const LEVEL_KEYS: [&str; 4] = ["0", "0p", "I", "Ip"];

/// Monochromatic drive and its first-order correction (closed form).
pub fn mono_stack(p: &SystemParams, l_max: usize) -> DriveStack {
    let lines = ncft_monochromatic(p);
    let mut st = DriveStack::single(NcftCoefficient::Lines(lines.clone()));
    st.orders.push(DriveOrder {
        order: 1,
        coefficient: NcftCoefficient::Closed(ClosedForm::LineFirstOrder(LineFirstOrder {
            lines,
            l_max,
            lambda: p.lambda,
            omega: p.omega,
            t0: p.t0,
        })),
    });
    st
}

/// Uncorrected and first-order corrected frames of the monochromatic drive.
pub fn mono_frames(p: &SystemParams, l_max: usize, quad: &QuadConfig) -> Result<[FrameHamiltonian; 2]> {
    let st = mono_stack(p, l_max);
    Ok([st.truncated(0).frame(p, quad)?, st.frame(p, quad)?])
}

/// Central Floquet modes of one drive at one time.
struct Modes {
    eps: Vec<f64>,
    snaps: Vec<FockState>,
}

fn modes_at(fr: &FrameHamiltonian, m_max: usize, p: &SystemParams, t: f64) -> Result<Modes> {
    let sol = quasienergy_solve(fr, m_max, p)?;
    let (idx, snaps) = central_snapshots(&sol, t)?;
    Ok(Modes {
        eps: idx.iter().map(|&i| sol.epsilon[i]).collect(),
        snaps,
    })
}

pub fn run(cfg: &ResolvedConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let started = chrono::Utc::now().to_rfc3339();
    log::info!("harness: running {}", cfg.experiment.name());
    let mut summary = BTreeMap::new();
    let columns = match cfg.experiment {
        Experiment::Spectrum => spectrum(cfg),
        Experiment::QChart => q_chart(cfg),
        Experiment::CorrectionScan => correction_scan(cfg)?,
        Experiment::T0Scan => t0_scan(cfg)?,
        Experiment::MicromotionScan => micromotion_scan(cfg)?,
        Experiment::CatInfidelity => cat_infidelity(cfg, &mut summary)?,
        Experiment::SweetSpot => sweet_spot(cfg, &mut summary)?,
    };
    let metadata = Metadata {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        summary,
    };
    ResultTable::new(columns, metadata)
}

/// Run and write `<output>.csv` and `<output>.meta.json`.
pub fn run_and_save(cfg: &ResolvedConfig) -> Result<ResultTable> {
    let t = run(cfg)?;
    t.save(&cfg.output)?;
    Ok(t)
}

fn mono_params(p: &SystemParams, l_max: usize) -> MonoParams {
    MonoParams::from_system(p, l_max)
}

fn spectrum(cfg: &ResolvedConfig) -> Columns {
    let p = &cfg.params;
    let h = rwa_target(&mono_params(p, cfg.l_max), p.n_fock);
    let e = crate::linalg::eigvalsh(&h);
    vec![
        ("index".into(), (0..e.len()).map(|i| i as f64).collect()),
        ("energy".into(), e),
    ]
}

fn q_chart(cfg: &ResolvedConfig) -> Columns {
    let p = &cfg.params;
    let g = &cfg.q_grid;
    let mp = mono_params(p, cfg.l_max);
    let h = rwa_target(&mp, p.n_fock);
    let mut rs = Vec::new();
    let mut ths = Vec::new();
    let mut pts = Vec::new();
    for i in 0..g.n_r {
        let r = g.r_max * i as f64 / (g.n_r - 1) as f64;
        for j in 0..g.n_theta {
            let th = 2.0 * PI * j as f64 / g.n_theta as f64;
            rs.push(r);
            ths.push(th);
            pts.push((r * th.cos(), r * th.sin()));
        }
    }
    let q = qfunction(&h, &pts, p.lambda);
    let exact: Vec<f64> = rs.iter().zip(&ths).map(|(&r, &t)| rwa_q_exact(&mp, r, t)).collect();
    vec![
        ("r".into(), rs),
        ("theta".into(), ths),
        ("x".into(), pts.iter().map(|p| p.0).collect()),
        ("p".into(), pts.iter().map(|p| p.1).collect()),
        ("q".into(), q.iter().map(|z| z.re).collect()),
        ("q_exact".into(), exact),
    ]
}

fn with_var(p: &SystemParams, var: &str, v: f64) -> SystemParams {
    let mut q = p.clone();
    match var {
        "beta" => q.beta = v,
        "t0" => q.t0 = v,
        _ => unreachable!("sweep variable validated"),
    }
    q
}

fn level_columns(prefix: &str, vals: &[[f64; 4]]) -> Columns {
    (0..4)
        .map(|k| (format!("{prefix}_{}", LEVEL_KEYS[k]), vals.iter().map(|v| v[k]).collect()))
        .collect()
}

fn correction_scan(cfg: &ResolvedConfig) -> Result<Columns> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let xs = sweep.values();
    let base = &cfg.params;
    let points: Vec<(Modes, Modes)> = xs
        .par_iter()
        .map(|&beta| {
            let p = with_var(base, "beta", beta);
            let [f0, f1] = mono_frames(&p, cfg.l_max, &cfg.quad)?;
            Ok((modes_at(&f0, cfg.m_max, &p, p.t0)?, modes_at(&f1, cfg.m_max, &p, p.t0)?))
        })
        .collect::<Result<Vec<_>>>()?;
    // target eigenvectors do not depend on beta; energies scale with it
    let unit = mono_params(&SystemParams { beta: 1.0, ..base.clone() }, cfg.l_max);
    let (e_unit, targets) = selected_levels(&rwa_target(&unit, base.n_fock));
    let mut out = vec![("beta".into(), xs.clone())];
    for which in 0..2 {
        let mut refs = targets.clone();
        let mut de = Vec::new();
        let mut fid = Vec::new();
        for (x, pt) in xs.iter().zip(&points) {
            let m = if which == 0 { &pt.0 } else { &pt.1 };
            let matched = greedy_match(&refs, &m.snaps)?;
            let mut d = [0.0; 4];
            let mut f = [0.0; 4];
            for (k, &(j, _)) in matched.iter().enumerate() {
                d[k] = fold_quasienergy(m.eps[j] - x * e_unit[k], base.lambda, base.omega);
                f[k] = state_fidelity(&targets[k], &m.snaps[j])?;
            }
            refs = matched.iter().map(|&(j, _)| m.snaps[j].clone()).collect();
            de.push(d);
            fid.push(f);
        }
        let tag = if which == 0 { "orig" } else { "1st" };
        out.extend(level_columns(&format!("dE_{tag}"), &de));
        out.extend(level_columns(&format!("F_{tag}"), &fid));
    }
    Ok(reorder(out))
}

/// `beta, dE_orig_*, dE_1st_*, F_orig_*, F_1st_*`.
fn reorder(cols: Columns) -> Columns {
    let rank = |n: &str| {
        ["beta", "t0", "dE_orig", "dE_1st", "F_orig", "F_1st"]
            .iter()
            .position(|p| n == *p || n.starts_with(&format!("{p}_")))
            .unwrap_or(usize::MAX)
    };
    let mut c = cols;
    c.sort_by_key(|(n, _)| rank(n));
    c
}

fn t0_scan(cfg: &ResolvedConfig) -> Result<Columns> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let xs = sweep.values();
    let base = &cfg.params;
    let mp = mono_params(base, cfg.l_max);
    let (e, targets) = selected_levels(&rwa_target(&mp, base.n_fock));
    let rows: Vec<LevelRow> = xs
        .par_iter()
        .map(|&t0| {
            let p = with_var(base, "t0", t0);
            let [f0, f1] = mono_frames(&p, cfg.l_max, &cfg.quad)?;
            let mut r: LevelRow = Default::default();
            for (which, fr) in [&f0, &f1].into_iter().enumerate() {
                let sol = quasienergy_solve(fr, cfg.m_max, &p)?;
                let tr = track_levels(&sol, &targets, t0)?;
                for (k, lv) in tr.iter().enumerate() {
                    let d = fold_quasienergy(lv.quasienergy - e[k], p.lambda, p.omega);
                    if which == 0 {
                        r.0[k] = d;
                        r.2[k] = lv.overlap;
                    } else {
                        r.1[k] = d;
                        r.3[k] = lv.overlap;
                    }
                }
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![("t0".into(), xs)];
    out.extend(level_columns("dE_orig", &rows.iter().map(|r| r.0).collect::<Vec<_>>()));
    out.extend(level_columns("dE_1st", &rows.iter().map(|r| r.1).collect::<Vec<_>>()));
    out.extend(level_columns("F_orig", &rows.iter().map(|r| r.2).collect::<Vec<_>>()));
    out.extend(level_columns("F_1st", &rows.iter().map(|r| r.3).collect::<Vec<_>>()));
    Ok(out)
}

/// Fidelity of the tracked Floquet modes with the target states along one period.
pub fn micromotion_profile(
    fr: &FrameHamiltonian,
    p: &SystemParams,
    m_max: usize,
    targets: &[FockState],
    ts: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let sol = quasienergy_solve(fr, m_max, p)?;
    let tr = track_levels(&sol, targets, p.t0)?;
    tr.iter()
        .zip(targets)
        .map(|(lv, tg)| {
            ts.iter()
                .map(|&t| state_fidelity(tg, &crate::floquet_solver::micromotion(&sol, lv.index, t)?))
                .collect()
        })
        .collect()
}

fn micromotion_scan(cfg: &ResolvedConfig) -> Result<Columns> {
    let p = &cfg.params;
    let n = cfg.t_points;
    let ts: Vec<f64> = (0..n).map(|j| p.period() * j as f64 / n as f64).collect();
    let (_, targets) = selected_levels(&rwa_target(&mono_params(p, cfg.l_max), p.n_fock));
    let frames = mono_frames(p, cfg.l_max, &cfg.quad)?;
    let profiles = frames
        .par_iter()
        .map(|fr| micromotion_profile(fr, p, cfg.m_max, &targets, &ts))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![("t".into(), ts)];
    for (tag, prof) in ["orig", "1st"].iter().zip(&profiles) {
        for (k, col) in prof.iter().enumerate() {
            out.push((format!("F_{tag}_{}", LEVEL_KEYS[k]), col.clone()));
        }
    }
    Ok(out)
}

/// Per-order frames of the cat-lattice drive at unit amplitude; order `m`
/// is weighted by `beta^{m+1}`.
pub fn cat_order_frames(
    p: &SystemParams,
    cat: &CatSettings,
    l_max: usize,
    quad: &QuadConfig,
) -> Result<Vec<FrameHamiltonian>> {
    let unit = SystemParams { beta: 1.0, ..p.clone() };
    let target = NcftCoefficient::Closed(ClosedForm::CatLattice(ncft_cat_lattice(
        cat.q,
        c(cat.alpha0, 0.0),
        cat.gamma,
        &unit,
    )?));
    let top = cat.orders.iter().copied().max().unwrap_or(0);
    let stack = if top == 0 {
        DriveStack::single(target)
    } else {
        correction_loop(&target, top, l_max, &unit, quad)?
    };
    stack.order_frames(&unit, quad)
}

/// Return fidelity of the cat states over one period for the drive with
/// corrections up to `order`, at amplitude `beta`.
pub fn cat_fidelity(
    frames: &[FrameHamiltonian],
    order: u32,
    beta: f64,
    p: &SystemParams,
    cat: &CatSettings,
    prop: &crate::floquet_solver::PropagatorConfig,
) -> Result<f64> {
    let mut fr = FrameHamiltonian::zeros(p.n_fock);
    for (m, f) in frames.iter().enumerate().take(order as usize + 1) {
        fr = fr.add(f, beta.powi(m as i32 + 1));
    }
    let alpha = cat.alpha0 * cat.gamma.exp();
    let cats = cat_basis(cat.q as usize, alpha, p.n_fock)?;
    let out = propagate_states(&fr, p.t0, p, &cats, prop)?;
    Ok(return_fidelity(&cats, &out.states))
}

fn cat_infidelity(cfg: &ResolvedConfig, summary: &mut BTreeMap<String, f64>) -> Result<Columns> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let xs = sweep.values();
    let p = &cfg.params;
    let frames = cat_order_frames(p, &cfg.cat, cfg.l_max, &cfg.quad)?;
    let jobs: Vec<(usize, u32)> = (0..xs.len())
        .flat_map(|i| cfg.cat.orders.iter().map(move |&o| (i, o)))
        .collect();
    let vals = jobs
        .par_iter()
        .map(|&(i, o)| Ok(1.0 - cat_fidelity(&frames, o, xs[i], p, &cfg.cat, &cfg.propagator)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = vec![("beta".into(), xs.clone())];
    for (oi, &o) in cfg.cat.orders.iter().enumerate() {
        let col: Vec<f64> = (0..xs.len()).map(|i| vals[i * cfg.cat.orders.len() + oi]).collect();
        match fit_loglog(&xs, &col, cfg.cat.fit_window) {
            Ok((s, b)) => {
                summary.insert(format!("slope_order{o}"), s);
                summary.insert(format!("intercept_order{o}"), b);
            }
            Err(e) => log::warn!("harness: no slope for order {o}: {e}"),
        }
        out.push((format!("IF_order{o}"), col));
    }
    Ok(out)
}

fn sweet_spot(cfg: &ResolvedConfig, summary: &mut BTreeMap<String, f64>) -> Result<Columns> {
    let [lo, hi] = cfg.bracket;
    let roots = sweet_spot_roots(lo, hi)?;
    if let Some(&r) = roots.first() {
        summary.insert("alpha_min".into(), r);
    } else {
        return Err(crate::error::Error::Domain {
            module: "harness",
            msg: format!("no sweet spot in [{lo}, {hi}]"),
        });
    }
    Ok(vec![
        ("index".into(), (0..roots.len()).map(|i| i as f64).collect()),
        ("alpha".into(), roots.clone()),
        ("residual".into(), roots.iter().map(|&a| sweet_spot_g(a)).collect()),
    ])
}

/// Label of tracked level `k` as used in plots.
pub fn level_label(k: usize) -> &'static str {
    LEVEL_LABELS[k]
}
