//! One-dimensional parameter scans over several solution methods, written
//! as deterministic long-format tables.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eom::EomOptions;
use crate::error::{Error, Result};
use crate::observables::{compute_observables, g2_from_moments};
use crate::oracle::{apply_liouvillian, moment_from_density, steady_density, DEFAULT_DIM_CAP};
use crate::params::{validate_params, RawParams, SystemParams};
use crate::perturbative::solve_perturbative;
use crate::steady::{observable_seeds, solve_exact_for, Method};
use crate::system::AssemblyOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParam {
    J,
    Delta,
    /// `omega_L - omega_a = -delta`; stored as `delta`.
    LaserOffset,
    Omega,
    NThermal,
}

impl ScanParam {
    /// Column value written to `param_name`.
    pub fn column_name(self) -> &'static str {
        match self {
            ScanParam::J => "j",
            ScanParam::Delta | ScanParam::LaserOffset => "delta",
            ScanParam::Omega => "omega",
            ScanParam::NThermal => "n_thermal",
        }
    }

    /// Sets the parameter and returns the stored column value.
    fn apply(self, raw: &mut RawParams, x: f64) -> f64 {
        match self {
            ScanParam::J => raw.j = x,
            ScanParam::Delta => raw.delta = x,
            ScanParam::LaserOffset => {
                raw.delta = -x;
                return -x;
            }
            ScanParam::Omega => raw.omega = x,
            ScanParam::NThermal => raw.n_thermal = x,
        }
        x
    }
}

impl FromStr for ScanParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "j" => ScanParam::J,
            "delta" => ScanParam::Delta,
            "laser_offset" => ScanParam::LaserOffset,
            "omega" => ScanParam::Omega,
            "n_thermal" | "nthermal" => ScanParam::NThermal,
            _ => return Err(Error::InvalidConfig(format!("unknown scan parameter `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub param: ScanParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl ScanAxis {
    /// Parses `name:from:to:steps`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidConfig(format!("scan axis `{text}` is not name:from:to:steps"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(Self {
            param: parts[0].parse()?,
            from: parts[1].parse().map_err(|_| bad())?,
            to: parts[2].parse().map_err(|_| bad())?,
            steps: parts[3].parse().map_err(|_| bad())?,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let span = self.to - self.from;
        (0..self.steps)
            .map(|k| self.from + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableName {
    NA,
    G2,
    Nn,
}

impl FromStr for ObservableName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "n_a" | "na" => ObservableName::NA,
            "g2" => ObservableName::G2,
            "nn" | "nn_coherence" => ObservableName::Nn,
            _ => return Err(Error::InvalidConfig(format!("unknown observable `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub base: RawParams,
    /// `None` evaluates the base point only.
    pub axis: Option<ScanAxis>,
    pub methods: Vec<Method>,
    pub observables: Vec<ObservableName>,
    pub appendix_verbatim: bool,
    /// Fock cutoff of the density oracle; defaults to `n_max`.
    pub oracle_cut: Option<usize>,
}

impl ScanConfig {
    pub fn new(base: RawParams, axis: Option<ScanAxis>, methods: Vec<Method>) -> Self {
        Self {
            base,
            axis,
            methods,
            observables: vec![ObservableName::NA, ObservableName::G2, ObservableName::Nn],
            appendix_verbatim: false,
            oracle_cut: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let base = validate_params(&self.base)?;
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        if let Some(axis) = &self.axis {
            if axis.steps < 1 {
                return Err(Error::InvalidConfig("steps must be at least 1".into()));
            }
            if !(axis.from <= axis.to) {
                return Err(Error::InvalidConfig("scan requires from <= to".into()));
            }
            // Check the extreme points validate as well.
            for x in [axis.from, axis.to] {
                let mut raw = self.base.clone();
                axis.param.apply(&mut raw, x);
                validate_params(&raw)?;
            }
        }
        if self.wants(ObservableName::G2) && base.n_max < 2 {
            return Err(Error::InvalidConfig("g2 requires n_max >= 2".into()));
        }
        if self.methods.contains(&Method::Oracle) {
            let cut = self.oracle_cut();
            let dim = (cut as u128 + 1).checked_pow(base.n_cavities as u32);
            if dim.map_or(true, |d| d > DEFAULT_DIM_CAP as u128) {
                return Err(Error::InvalidConfig(format!(
                    "oracle dimension (n_cut+1)^N exceeds {DEFAULT_DIM_CAP}"
                )));
            }
        }
        Ok(())
    }

    fn oracle_cut(&self) -> usize {
        self.oracle_cut.unwrap_or(self.base.n_max)
    }

    fn wants(&self, o: ObservableName) -> bool {
        self.observables.contains(&o)
    }

    fn eom(&self) -> EomOptions {
        EomOptions { appendix_verbatim: self.appendix_verbatim }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub param_name: String,
    pub param_value: Option<f64>,
    pub method: Method,
    pub n_a: Option<f64>,
    pub g2: Option<f64>,
    pub re_nn: Option<f64>,
    pub im_nn: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
struct PointResult {
    n_a: Option<f64>,
    g2: Option<f64>,
    nn: Option<Complex64>,
    residual: Option<f64>,
}

fn evaluate(params: &SystemParams, method: Method, cfg: &ScanConfig) -> Result<PointResult> {
    let want_g2 = cfg.wants(ObservableName::G2);
    let solution = match method {
        Method::Exact => {
            let opts = AssemblyOptions { eom: cfg.eom(), ..Default::default() };
            solve_exact_for(params, opts, &observable_seeds(params))?
        }
        Method::Pert0 | Method::Pert1 | Method::Pert2 => {
            solve_perturbative(params, method.perturbative_order().unwrap(), cfg.eom())?
        }
        Method::Oracle => return evaluate_oracle(params, cfg),
    };
    let obs = compute_observables(&solution, want_g2)?;
    Ok(PointResult {
        n_a: Some(obs.n_a),
        g2: obs.g2,
        nn: obs.nn_coherence.filter(|_| cfg.wants(ObservableName::Nn)),
        residual: Some(solution.residual),
    })
}

fn evaluate_oracle(params: &SystemParams, cfg: &ScanConfig) -> Result<PointResult> {
    let cut = cfg.oracle_cut();
    let rho = steady_density(params, cut)?;
    let n = params.n_cavities;
    let single = |m: u8, k: u8| {
        let mut e = vec![(0u8, 0u8); n];
        e[0] = (m, k);
        moment_from_density(&rho, &e)
    };
    let n_a = single(1, 1)?.re;
    let g2 = if cfg.wants(ObservableName::G2) {
        Some(g2_from_moments(n_a, single(2, 2)?.re)?)
    } else {
        None
    };
    let nn = if n >= 2 && cfg.wants(ObservableName::Nn) {
        let mut e = vec![(0u8, 0u8); n];
        e[0] = (1, 0);
        e[1] = (0, 1);
        Some(moment_from_density(&rho, &e)?)
    } else {
        None
    };
    let d = rho.dim();
    let flat: Vec<Complex64> = (0..d * d).map(|k| rho.get(k / d, k % d)).collect();
    let residual = apply_liouvillian(params, cut, &flat).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(PointResult { n_a: Some(n_a), g2, nn, residual: Some(residual) })
}

/// Evaluates every (point, method) pair; per-point failures are recorded in
/// the `error` column. Rows are parameter-major, method-minor.
pub fn run_scan(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    let points: Vec<(Option<f64>, RawParams)> = match &cfg.axis {
        None => vec![(None, cfg.base.clone())],
        Some(axis) => axis
            .values()
            .into_iter()
            .map(|x| {
                let mut raw = cfg.base.clone();
                let stored = axis.param.apply(&mut raw, x);
                (Some(stored), raw)
            })
            .collect(),
    };
    let param_name = cfg.axis.map_or("none", |a| a.param.column_name()).to_string();
    let jobs: Vec<(Option<f64>, &RawParams, Method)> = points
        .iter()
        .flat_map(|(v, raw)| cfg.methods.iter().map(move |&m| (*v, raw, m)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(value, raw, method)| {
            let result = validate_params(raw).and_then(|p| evaluate(&p, method, cfg));
            let (res, error) = match result {
                Ok(r) => (r, None),
                Err(e) => (PointResult::default(), Some(e.to_string())),
            };
            ScanRow {
                param_name: param_name.clone(),
                param_value: value,
                method,
                n_a: res.n_a.filter(|_| cfg.wants(ObservableName::NA)),
                g2: res.g2,
                re_nn: res.nn.map(|z| z.re),
                im_nn: res.nn.map(|z| z.im),
                residual: res.residual,
                error,
            }
        })
        .collect();
    Ok(rows)
}

pub const CSV_HEADER: &str = "param_name,param_value,method,n_a,g2,re_nn,im_nn,residual,error";

fn fmt_f64(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// CSV with a `#` comment line stating the unit convention and 17
/// significant digits per float.
pub fn write_csv<W: Write>(rows: &[ScanRow], cfg: &ScanConfig, mut w: W) -> io::Result<()> {
    let b = &cfg.base;
    writeln!(
        w,
        "# rates in units of gamma0; gamma=(1+n_thermal)*gamma0, pump=n_thermal*gamma0; base: N={} n_max={} delta={:?} u={:?} j={:?} omega={:?} gamma0={:?} n_thermal={:?} appendix_verbatim={}",
        b.n_cavities, b.n_max, b.delta, b.u, b.j, b.omega, b.gamma0, b.n_thermal, cfg.appendix_verbatim
    )?;
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{}",
            r.param_name,
            fmt_f64(r.param_value),
            r.method,
            fmt_f64(r.n_a),
            fmt_f64(r.g2),
            fmt_f64(r.re_nn),
            fmt_f64(r.im_nn),
            fmt_f64(r.residual),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ScanRow], mut w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, rows)?;
    writeln!(w)
}
