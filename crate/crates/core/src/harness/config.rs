use crate::error::{Error, Result};
use crate::floquet_solver::{PropagatorConfig, DEFAULT_M_MAX};
use crate::fockspace::SystemParams;
use crate::magnus::DEFAULT_L_MAX;
use crate::ncft::QuadConfig;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum,
    QChart,
    CorrectionScan,
    T0Scan,
    MicromotionScan,
    CatInfidelity,
    SweetSpot,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::QChart => "q_chart",
            Experiment::CorrectionScan => "correction_scan",
            Experiment::T0Scan => "t0_scan",
            Experiment::MicromotionScan => "micromotion_scan",
            Experiment::CatInfidelity => "cat_infidelity",
            Experiment::SweetSpot => "sweet_spot",
        }
    }

    fn default_sweep(self) -> Option<Sweep> {
        let lin = |variable: &str, start, stop, points| Sweep {
            variable: variable.into(),
            start,
            stop,
            points,
            log: false,
        };
        match self {
            Experiment::CorrectionScan => Some(lin("beta", 0.05, 0.6, 12)),
            Experiment::T0Scan => Some(lin("t0", 0.0, 2.0 * PI * 15.0 / 16.0, 16)),
            Experiment::CatInfidelity => Some(Sweep {
                log: true,
                ..lin("beta", 0.02, 0.2, 6)
            }),
            _ => None,
        }
    }

    fn sweep_variable(self) -> Option<&'static str> {
        match self {
            Experiment::CorrectionScan | Experiment::CatInfidelity => Some("beta"),
            Experiment::T0Scan => Some("t0"),
            _ => None,
        }
    }

    fn is_cat(self) -> bool {
        self == Experiment::CatInfidelity
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + s * (self.stop - self.start)
                }
            })
            .collect()
    }
}

/// Partial `SystemParams`; unset fields take the experiment's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsOverlay {
    pub lambda: Option<f64>,
    pub omega: Option<f64>,
    pub n_sym: Option<u32>,
    pub beta: Option<f64>,
    pub t0: Option<f64>,
    pub n_fock: Option<usize>,
}

impl ParamsOverlay {
    fn apply(&self, base: SystemParams) -> SystemParams {
        SystemParams {
            lambda: self.lambda.unwrap_or(base.lambda),
            omega: self.omega.unwrap_or(base.omega),
            n_sym: self.n_sym.unwrap_or(base.n_sym),
            beta: self.beta.unwrap_or(base.beta),
            t0: self.t0.unwrap_or(base.t0),
            n_fock: self.n_fock.unwrap_or(base.n_fock),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatSettings {
    pub q: u32,
    pub alpha0: f64,
    pub gamma: f64,
    /// Drive orders to compare; order `m` includes corrections `1..=m`.
    pub orders: Vec<u32>,
    /// Least-squares window for the log-log slope.
    pub fit_window: [f64; 2],
}

impl Default for CatSettings {
    fn default() -> Self {
        CatSettings {
            q: 4,
            alpha0: 1.198,
            gamma: 0.25,
            orders: vec![0, 1],
            fit_window: [0.02, 0.2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QGrid {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for QGrid {
    fn default() -> Self {
        QGrid {
            r_max: 6.0,
            n_r: 25,
            n_theta: 32,
        }
    }
}

/// Experiment description as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub params: ParamsOverlay,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    pub output: String,
    #[serde(default)]
    pub m_max: Option<usize>,
    #[serde(default)]
    pub l_max: Option<usize>,
    #[serde(default)]
    pub t_points: Option<usize>,
    #[serde(default)]
    pub bracket: Option<[f64; 2]>,
    #[serde(default)]
    pub cat: Option<CatSettings>,
    #[serde(default)]
    pub q_grid: Option<QGrid>,
    #[serde(default)]
    pub quad: Option<QuadConfig>,
    #[serde(default)]
    pub propagator: Option<PropagatorConfig>,
}

/// Fully resolved configuration; this is what output files echo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub params: SystemParams,
    pub sweep: Option<Sweep>,
    pub output: String,
    pub m_max: usize,
    pub l_max: usize,
    pub t_points: usize,
    pub bracket: [f64; 2],
    pub cat: CatSettings,
    pub q_grid: QGrid,
    pub quad: QuadConfig,
    pub propagator: PropagatorConfig,
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n_fock: Option<usize>,
    pub m_max: Option<usize>,
    pub l_max: Option<usize>,
    pub out_dir: Option<std::path::PathBuf>,
}

fn bad(field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.into(),
    }
}

fn finite(field: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(bad(field, "must be finite"))
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<ExperimentConfig> {
        serde_json::from_str(s).map_err(|e| bad("<root>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn resolve(&self, ov: &Overrides) -> Result<ResolvedConfig> {
        let exp = self.experiment;
        let base = if exp.is_cat() {
            SystemParams {
                lambda: 0.25,
                omega: 1.0,
                n_sym: 4,
                beta: 0.1,
                t0: 0.0,
                n_fock: 120,
            }
        } else {
            SystemParams::default()
        };
        let mut params = self.params.apply(base);
        if let Some(n) = ov.n_fock {
            params.n_fock = n;
        }
        let mut output = self.output.clone();
        if let Some(dir) = &ov.out_dir {
            let name = Path::new(&self.output)
                .file_name()
                .ok_or_else(|| bad("output", "needs a file name prefix"))?;
            output = dir.join(name).to_string_lossy().into_owned();
        }
        let sweep = match (&self.sweep, exp.sweep_variable()) {
            (Some(s), _) => Some(s.clone()),
            (None, Some(_)) => exp.default_sweep(),
            (None, None) => None,
        };
        let r = ResolvedConfig {
            experiment: exp,
            params,
            sweep,
            output,
            m_max: ov.m_max.or(self.m_max).unwrap_or(DEFAULT_M_MAX),
            l_max: ov.l_max.or(self.l_max).unwrap_or(DEFAULT_L_MAX),
            t_points: self.t_points.unwrap_or(64),
            bracket: self.bracket.unwrap_or([1.0, 2.0]),
            cat: self.cat.clone().unwrap_or_default(),
            q_grid: self.q_grid.clone().unwrap_or_default(),
            quad: self.quad.clone().unwrap_or_default(),
            propagator: self.propagator.clone().unwrap_or_default(),
        };
        r.validate()?;
        Ok(r)
    }
}

impl ResolvedConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (f, x) in [
            ("params.lambda", p.lambda),
            ("params.omega", p.omega),
            ("params.beta", p.beta),
            ("params.t0", p.t0),
        ] {
            finite(f, x)?;
        }
        p.validate().map_err(|e| bad("params", e.to_string()))?;
        if self.output.trim().is_empty() {
            return Err(bad("output", "must be a non-empty path prefix"));
        }
        if self.m_max < 1 {
            return Err(bad("m_max", "must be >= 1"));
        }
        if self.l_max < 1 {
            return Err(bad("l_max", "must be >= 1"));
        }
        if let Some(s) = &self.sweep {
            let want = self.experiment.sweep_variable();
            if want.is_none() {
                return Err(bad("sweep", format!("{} takes no sweep", self.experiment.name())));
            }
            if Some(s.variable.as_str()) != want {
                return Err(bad(
                    "sweep.variable",
                    format!("{} sweeps `{}`", self.experiment.name(), want.unwrap_or_default()),
                ));
            }
            finite("sweep.start", s.start)?;
            finite("sweep.stop", s.stop)?;
            if s.points < 2 {
                return Err(bad("sweep.points", "must be >= 2"));
            }
            if s.log && !(s.start > 0.0 && s.stop > 0.0) {
                return Err(bad("sweep", "log sweeps need positive bounds"));
            }
            match s.variable.as_str() {
                "beta" if s.start < 0.0 || s.stop < 0.0 => return Err(bad("sweep", "beta must be >= 0")),
                "t0" if s.start < 0.0 || s.stop >= p.period() || s.start >= p.period() => {
                    return Err(bad("sweep", "t0 must lie in [0, 2pi/omega)"))
                }
                _ => {}
            }
        }
        match self.experiment {
            Experiment::MicromotionScan if self.t_points < 2 => return Err(bad("t_points", "must be >= 2")),
            Experiment::SweetSpot => {
                let [lo, hi] = self.bracket;
                finite("bracket", lo)?;
                finite("bracket", hi)?;
                if !(0.0 < lo && lo < hi) {
                    return Err(bad("bracket", "need 0 < lo < hi"));
                }
            }
            Experiment::CatInfidelity => {
                let c = &self.cat;
                if c.q < 2 {
                    return Err(bad("cat.q", "must be >= 2"));
                }
                if !(c.gamma > 0.0) || !c.alpha0.is_finite() || c.alpha0 <= 0.0 {
                    return Err(bad("cat", "alpha0 and gamma must be positive"));
                }
                if c.orders.is_empty() || c.orders.iter().any(|&o| o > 2) {
                    return Err(bad("cat.orders", "orders must be a non-empty subset of {0, 1, 2}"));
                }
                let [a, b] = c.fit_window;
                if !(0.0 < a && a < b) {
                    return Err(bad("cat.fit_window", "need 0 < lo < hi"));
                }
            }
            Experiment::QChart => {
                let g = &self.q_grid;
                if g.n_r < 2 || g.n_theta < 1 || !(g.r_max > 0.0) {
                    return Err(bad("q_grid", "need n_r >= 2, n_theta >= 1, r_max > 0"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
