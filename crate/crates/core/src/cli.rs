//! Command-line front end: flat `key = value` configuration files, the
//! `rates`, `evolve` and `bounds` commands, and CSV/JSON outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DensityMatrix, Propagator};
use crate::entanglement::{
    calibrate, concurrence, death_time_bound_with, initial_state, numerical_death_time,
    survival_time_bound_with, Calibration, CalibrationCase, InitialStateParams, TimeBounds,
    CALIBRATION_GRID, CALIBRATION_HORIZON,
};
use crate::error::Error;
use crate::linalg::CMatrix;
use crate::quadrature::Quadrature;
use crate::resonance::{rates_with, ModelConfig, RateReport, ResonanceDatum, ResonanceTable, Spectra};
use crate::spectral::FormFactor;

/// Environment variable overriding the quadrature relative tolerance.
pub const QUAD_TOL_ENV: &str = "RESQ_QUAD_TOL";

/// CSV header of trajectory files.
pub const CSV_HEADER: &str = "t,x1,x2,x3,x4,re_alpha,im_alpha,D,C";

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed configuration or arguments (exit 2).
    #[error("{0}")]
    Parse(String),
    /// A library error (exit 3 for violated conditions, 1 otherwise).
    #[error(transparent)]
    Model(#[from] Error),
    /// An output could not be written (exit 4).
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Model(Error::Config(_))
            | CliError::Model(Error::Precondition(_))
            | CliError::Model(Error::Degeneracy { .. })
            | CliError::Model(Error::Domain(_)) => 3,
            CliError::Model(_) => 1,
            CliError::Io { .. } => 4,
        }
    }
}

/// Time-grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Initial state of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Amplitudes(InitialStateParams),
    /// Row-major real and imaginary parts.
    Matrix { re: Vec<f64>, im: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// `None` means `60/γ_th`.
    pub t_max: Option<f64>,
    pub steps: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub trajectory: String,
    pub summary: String,
    pub plotdata: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C_A")]
    pub c_a: f64,
    #[serde(rename = "C_B")]
    pub c_b: f64,
    pub kappa0: f64,
    pub calibrate: bool,
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub initial: Option<Initial>,
    pub time: TimeGrid,
    pub outputs: Outputs,
    pub constants: Constants,
}

const MODEL_KEYS: [&str; 11] = [
    "B1", "B2", "beta", "lambda1", "lambda2", "kappa1", "kappa2", "mu1", "mu2", "nu1", "nu2",
];
const FACTORS: [&str; 6] = ["g", "f", "g1", "g2", "f1", "f2"];

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Parse(format!("line {line_no}: expected `key = value`, found `{line}`"))
            })?;
            let key = key.trim().to_string();
            if !is_known_key(&key) {
                return Err(CliError::Parse(format!("line {line_no}: unknown field `{key}`")));
            }
            if let Some((_, prev)) = map.get(&key) {
                return Err(CliError::Parse(format!(
                    "line {line_no}: field `{key}` already set on line {prev}"
                )));
            }
            map.insert(key, (value.trim().to_string(), line_no));
        }
        Ok(Self { map })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn parse_with<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some((v, line)) => f(v).map(Some).ok_or_else(|| {
                CliError::Parse(format!("line {line}: field `{key}`: expected {what}, found `{v}`"))
            }),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.parse_with(key, "a finite number", |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?
            .ok_or_else(|| CliError::Parse(format!("missing required field `{key}`")))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.parse_with(key, "16 comma-separated numbers", |v| {
            let xs: Option<Vec<f64>> = v.split(',').map(|s| s.trim().parse::<f64>().ok()).collect();
            xs.filter(|xs| xs.len() == 16 && xs.iter().all(|x| x.is_finite()))
        })
    }
}

fn is_known_key(key: &str) -> bool {
    if MODEL_KEYS.contains(&key) {
        return true;
    }
    if let Some(rest) = key.strip_prefix("formfactor.") {
        if let Some((name, field)) = rest.split_once('.') {
            return FACTORS.contains(&name) && ["p", "m", "w"].contains(&field);
        }
        return false;
    }
    matches!(
        key,
        "initial.a1.re"
            | "initial.a1.im"
            | "initial.a2.re"
            | "initial.a2.im"
            | "initial.rho.re"
            | "initial.rho.im"
            | "time.t_max"
            | "time.steps"
            | "time.spacing"
            | "output.trajectory"
            | "output.summary"
            | "output.plotdata"
            | "constants.C_A"
            | "constants.C_B"
            | "constants.kappa0"
            | "constants.calibrate"
    )
}

fn form_factor(e: &Entries, name: &str, fallback: Option<FormFactor>) -> Result<FormFactor, CliError> {
    let key = |field: &str| format!("formfactor.{name}.{field}");
    let missing = |field: &str| CliError::Parse(format!("missing required field `{}`", key(field)));
    let p = match (e.f64(&key("p"))?, fallback) {
        (Some(p), _) => p,
        (None, Some(fb)) => fb.p,
        (None, None) => return Err(missing("p")),
    };
    let m = match (e.parse_with(&key("m"), "1 or 2", |v| v.parse::<u32>().ok())?, fallback) {
        (Some(m), _) => m,
        (None, Some(fb)) => fb.m,
        (None, None) => return Err(missing("m")),
    };
    let w = match (e.f64(&key("w"))?, fallback) {
        (Some(w), _) => w,
        (None, Some(fb)) => fb.w,
        (None, None) => return Err(missing("w")),
    };
    Ok(FormFactor { p, m, w })
}

/// Parses a configuration file's text. Only syntax and types are checked
/// here; physical validity is checked when the model is used.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let e = Entries::parse(text)?;
    let coupling = |k: &str| -> Result<f64, CliError> { Ok(e.f64(k)?.unwrap_or(0.0)) };
    let g = form_factor(&e, "g", None)?;
    let f = form_factor(&e, "f", None)?;
    let model = ModelConfig {
        b1: e.require_f64("B1")?,
        b2: e.require_f64("B2")?,
        beta: e.require_f64("beta")?,
        lambda1: coupling("lambda1")?,
        lambda2: coupling("lambda2")?,
        kappa1: coupling("kappa1")?,
        kappa2: coupling("kappa2")?,
        mu1: coupling("mu1")?,
        mu2: coupling("mu2")?,
        nu1: coupling("nu1")?,
        nu2: coupling("nu2")?,
        g,
        f,
        g1: form_factor(&e, "g1", Some(g))?,
        g2: form_factor(&e, "g2", Some(g))?,
        f1: form_factor(&e, "f1", Some(f))?,
        f2: form_factor(&e, "f2", Some(f))?,
    };

    let amp_keys = ["initial.a1.re", "initial.a1.im", "initial.a2.re", "initial.a2.im"];
    let has_amp = amp_keys.iter().any(|k| e.has(k));
    let has_rho = e.has("initial.rho.re") || e.has("initial.rho.im");
    let initial = match (has_amp, has_rho) {
        (true, true) => {
            return Err(CliError::Parse(
                "give the initial state either as amplitudes or as a matrix, not both".into(),
            ))
        }
        (true, false) => {
            let v = |k: &str| -> Result<f64, CliError> { Ok(e.f64(k)?.unwrap_or(0.0)) };
            Some(Initial::Amplitudes(InitialStateParams {
                a1: Complex64::new(v(amp_keys[0])?, v(amp_keys[1])?),
                a2: Complex64::new(v(amp_keys[2])?, v(amp_keys[3])?),
            }))
        }
        (false, true) => Some(Initial::Matrix {
            re: e.list("initial.rho.re")?.unwrap_or_else(|| vec![0.0; 16]),
            im: e.list("initial.rho.im")?.unwrap_or_else(|| vec![0.0; 16]),
        }),
        (false, false) => None,
    };

    let steps = e
        .parse_with("time.steps", "an integer >= 2", |v| v.parse::<usize>().ok().filter(|&n| n >= 2))?
        .unwrap_or(201);
    let spacing = e
        .parse_with("time.spacing", "`linear` or `log`", |v| match v {
            "linear" => Some(Spacing::Linear),
            "log" => Some(Spacing::Log),
            _ => None,
        })?
        .unwrap_or(Spacing::Linear);
    let t_max = e.f64("time.t_max")?;
    if let Some(t) = t_max {
        if t <= 0.0 {
            return Err(CliError::Parse(format!("field `time.t_max`: must be > 0, found {t}")));
        }
    }
    let path = |k: &str, default: Option<&str>| -> Result<Option<String>, CliError> {
        match e.str(k) {
            Some("") => Err(CliError::Parse(format!("field `{k}`: path must be nonempty"))),
            Some(v) => Ok(Some(v.to_string())),
            None => Ok(default.map(str::to_string)),
        }
    };
    let outputs = Outputs {
        trajectory: path("output.trajectory", Some("trajectory.csv"))?.expect("default"),
        summary: path("output.summary", Some("summary.json"))?.expect("default"),
        plotdata: path("output.plotdata", None)?,
    };
    let positive = |k: &str| -> Result<f64, CliError> {
        let v = e.f64(k)?.unwrap_or(1.0);
        if v <= 0.0 {
            return Err(CliError::Parse(format!("field `{k}`: must be > 0, found {v}")));
        }
        Ok(v)
    };
    let constants = Constants {
        c_a: positive("constants.C_A")?,
        c_b: positive("constants.C_B")?,
        kappa0: positive("constants.kappa0")?,
        calibrate: e
            .parse_with("constants.calibrate", "`true` or `false`", |v| v.parse::<bool>().ok())?
            .unwrap_or(false),
    };
    Ok(RunConfig {
        model,
        initial,
        time: TimeGrid { t_max, steps, spacing },
        outputs,
        constants,
    })
}

impl RunConfig {
    /// Serializes back to the configuration file format; parsing the result
    /// yields an identical `RunConfig`.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let vals = [
            m.b1, m.b2, m.beta, m.lambda1, m.lambda2, m.kappa1, m.kappa2, m.mu1, m.mu2, m.nu1, m.nu2,
        ];
        for (k, v) in MODEL_KEYS.iter().zip(vals) {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        for (name, h) in m.form_factors() {
            let _ = writeln!(s, "formfactor.{name}.p = {:?}", h.p);
            let _ = writeln!(s, "formfactor.{name}.m = {}", h.m);
            let _ = writeln!(s, "formfactor.{name}.w = {:?}", h.w);
        }
        match &self.initial {
            Some(Initial::Amplitudes(a)) => {
                let _ = writeln!(s, "initial.a1.re = {:?}", a.a1.re);
                let _ = writeln!(s, "initial.a1.im = {:?}", a.a1.im);
                let _ = writeln!(s, "initial.a2.re = {:?}", a.a2.re);
                let _ = writeln!(s, "initial.a2.im = {:?}", a.a2.im);
            }
            Some(Initial::Matrix { re, im }) => {
                let join = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
                let _ = writeln!(s, "initial.rho.re = {}", join(re));
                let _ = writeln!(s, "initial.rho.im = {}", join(im));
            }
            None => {}
        }
        if let Some(t) = self.time.t_max {
            let _ = writeln!(s, "time.t_max = {t:?}");
        }
        let _ = writeln!(s, "time.steps = {}", self.time.steps);
        let spacing = match self.time.spacing {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        };
        let _ = writeln!(s, "time.spacing = {spacing}");
        let _ = writeln!(s, "output.trajectory = {}", self.outputs.trajectory);
        let _ = writeln!(s, "output.summary = {}", self.outputs.summary);
        if let Some(p) = &self.outputs.plotdata {
            let _ = writeln!(s, "output.plotdata = {p}");
        }
        let c = &self.constants;
        let _ = writeln!(s, "constants.C_A = {:?}", c.c_a);
        let _ = writeln!(s, "constants.C_B = {:?}", c.c_b);
        let _ = writeln!(s, "constants.kappa0 = {:?}", c.kappa0);
        let _ = writeln!(s, "constants.calibrate = {}", c.calibrate);
        s
    }

    /// The initial density matrix, if one was configured.
    pub fn initial_state(&self) -> Result<Option<DensityMatrix>, CliError> {
        match &self.initial {
            None => Ok(None),
            Some(Initial::Amplitudes(a)) => Ok(Some(initial_state(a)?)),
            Some(Initial::Matrix { re, im }) => {
                let m = CMatrix::from_fn(4, 4, |i, j| Complex64::new(re[4 * i + j], im[4 * i + j]));
                Ok(Some(DensityMatrix::new(m)?))
            }
        }
    }

    /// `p = [ρ₀]₁₁`.
    pub fn p(&self) -> Result<Option<f64>, CliError> {
        Ok(match &self.initial {
            Some(Initial::Amplitudes(a)) => Some(InitialStateParams::new(a.a1, a.a2)?.p()),
            _ => self.initial_state()?.map(|r| r.populations()[0]),
        })
    }
}

/// Time grid: linear `t_max·i/(n−1)`, or `0` followed by `n−1` geometric
/// points from `t_max·10⁻⁴` to `t_max`.
pub fn time_grid(t_max: f64, steps: usize, spacing: Spacing) -> Vec<f64> {
    match spacing {
        Spacing::Linear => (0..steps).map(|i| t_max * i as f64 / (steps - 1) as f64).collect(),
        Spacing::Log => {
            let mut out = vec![0.0];
            let n = steps - 1;
            let lo = t_max * 1e-4;
            for i in 0..n {
                let frac = if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
                out.push(if i + 1 == n { t_max } else { lo * (t_max / lo).powf(frac) });
            }
            out
        }
    }
}

/// Ordering of the bounds and the empirical death time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingFlags {
    pub t_b_le_t0: bool,
    pub t0_le_t_a: bool,
}

/// JSON summary written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub command: String,
    pub version: String,
    pub quadrature_rel_tol: f64,
    pub config: RunConfig,
    pub rates: Option<RateReport>,
    pub resonances: Option<Vec<ResonanceDatum>>,
    pub bounds: Option<TimeBounds>,
    pub empirical_death_time: Option<f64>,
    pub ordering: Option<OrderingFlags>,
    pub calibration: Option<Calibration>,
    pub notes: Vec<String>,
}

#[derive(Parser, Debug)]
#[command(name = "resq", version, about = "Resonance dynamics of two qubits in thermal reservoirs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Thermalization/decoherence rates and resonance data.
    Rates(CommonArgs),
    /// Density-matrix and concurrence trajectory.
    Evolve(CommonArgs),
    /// Entanglement death/survival bounds and the empirical death time.
    Bounds(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for relative output paths.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Override `time.t_max`.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Override `time.steps`.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Use logarithmic time spacing.
    #[arg(long)]
    pub log_grid: bool,
}

/// Quadrature settings honoring [`QUAD_TOL_ENV`].
pub fn quadrature_from_env() -> Result<Quadrature, CliError> {
    match std::env::var(QUAD_TOL_ENV) {
        Err(_) => Ok(Quadrature::default()),
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x > 0.0)
            .map(Quadrature::with_rel_tol)
            .ok_or_else(|| CliError::Parse(format!("{QUAD_TOL_ENV} must be a positive number, found `{v}`"))),
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(t) = args.t_max {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Parse(format!("--t-max must be > 0, found {t}")));
        }
        cfg.time.t_max = Some(t);
    }
    if let Some(n) = args.steps {
        if n < 2 {
            return Err(CliError::Parse(format!("--steps must be >= 2, found {n}")));
        }
        cfg.time.steps = n;
    }
    if args.log_grid {
        cfg.time.spacing = Spacing::Log;
    }
    cfg.model.validate()?;
    Ok(cfg)
}

fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(path)
}

fn all_resonances(table: &ResonanceTable) -> Vec<ResonanceDatum> {
    table.entries.iter().flatten().cloned().collect()
}

struct Context {
    cfg: RunConfig,
    quad: Quadrature,
    spectra: Spectra,
    rates: Option<RateReport>,
    notes: Vec<String>,
}

impl Context {
    fn new(args: &CommonArgs) -> Result<Self, CliError> {
        let quad = quadrature_from_env()?;
        let cfg = load(args)?;
        info!("computing spectral constants (relative tolerance {:e})", quad.rel_tol);
        let spectra = Spectra::compute(&cfg.model, &quad)?;
        let mut notes = Vec::new();
        let rates = match rates_with(&cfg.model, &spectra) {
            Ok(r) => Some(r),
            Err(Error::Precondition(msg)) => {
                notes.push(format!("rates unavailable: {msg}"));
                None
            }
            Err(e) => return Err(e.into()),
        };
        if cfg.model.warn_if_strong_coupling() {
            notes.push("varkappa^2 exceeds 0.1 x smallest Gibbs population".into());
        }
        Ok(Self {
            cfg,
            quad,
            spectra,
            rates,
            notes,
        })
    }

    fn report(&self, command: &str) -> SummaryReport {
        SummaryReport {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            quadrature_rel_tol: self.quad.rel_tol,
            config: self.cfg.clone(),
            rates: self.rates,
            resonances: None,
            bounds: None,
            empirical_death_time: None,
            ordering: None,
            calibration: None,
            notes: self.notes.clone(),
        }
    }

    fn t_max(&self) -> Result<f64, CliError> {
        if let Some(t) = self.cfg.time.t_max {
            return Ok(t);
        }
        match self.rates {
            Some(r) if r.gamma_th > 0.0 => Ok(CALIBRATION_HORIZON / r.gamma_th),
            _ => Err(CliError::Model(Error::Precondition(
                "time.t_max is required when the thermalization rate is zero or unavailable".into(),
            ))),
        }
    }

    fn rho0(&self) -> Result<DensityMatrix, CliError> {
        self.cfg
            .initial_state()?
            .ok_or_else(|| CliError::Parse("this command needs an initial state (initial.a1/a2 or initial.rho)".into()))
    }
}

fn to_json(report: &SummaryReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("summary serializes");
    s.push('\n');
    s
}

/// `rates`: rates and resonance data.
pub fn cmd_rates(args: &CommonArgs) -> Result<SummaryReport, CliError> {
    let ctx = Context::new(args)?;
    let table = ResonanceTable::from_spectra(&ctx.cfg.model, &ctx.spectra)?;
    let mut report = ctx.report("rates");
    report.resonances = Some(all_resonances(&table));
    write_file(&args.out_dir, &ctx.cfg.outputs.summary, &to_json(&report))?;
    Ok(report)
}

/// Trajectory CSV text for a propagated initial state.
pub fn trajectory_csv(cfg: &ModelConfig, table: &ResonanceTable, rho0: &DensityMatrix, times: &[f64]) -> Result<String, CliError> {
    let mut s = String::with_capacity(200 * (times.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for &t in times {
        let prop = Propagator::new(cfg, table, t)?;
        let rho = DensityMatrix {
            entries: prop.apply(&rho0.entries),
        };
        let x = rho.populations();
        let a = rho.alpha();
        let c = concurrence(&rho)?;
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            t, x[0], x[1], x[2], x[3], a.re, a.im, c.d, c.c
        );
    }
    Ok(s)
}

/// `evolve`: trajectory CSV (and optional plot data) plus summary.
pub fn cmd_evolve(args: &CommonArgs) -> Result<SummaryReport, CliError> {
    let ctx = Context::new(args)?;
    let model = ctx.cfg.model;
    let rho0 = ctx.rho0()?;
    let table = ResonanceTable::from_spectra(&model, &ctx.spectra)?;
    let t_max = ctx.t_max()?;
    let times = time_grid(t_max, ctx.cfg.time.steps, ctx.cfg.time.spacing);
    info!("propagating on {} grid points up to t = {t_max:e}", times.len());
    let csv = trajectory_csv(&model, &table, &rho0, &times)?;
    write_file(&args.out_dir, &ctx.cfg.outputs.trajectory, &csv)?;
    if let Some(plot) = &ctx.cfg.outputs.plotdata {
        write_file(&args.out_dir, plot, &csv)?;
    }
    let mut report = ctx.report("evolve");
    report.resonances = Some(all_resonances(&table));
    report.empirical_death_time =
        numerical_death_time(&model, &table, &rho0, t_max, ctx.cfg.time.steps.max(2))?;
    if report.empirical_death_time.is_none() {
        report.notes.push(format!("no entanglement death found up to t = {t_max:e}"));
    }
    write_file(&args.out_dir, &ctx.cfg.outputs.summary, &to_json(&report))?;
    Ok(report)
}

/// `bounds`: death/survival bounds, empirical death time and their ordering.
pub fn cmd_bounds(args: &CommonArgs) -> Result<SummaryReport, CliError> {
    let ctx = Context::new(args)?;
    let model = ctx.cfg.model;
    let rates = ctx.rates.ok_or_else(|| {
        CliError::Model(Error::Precondition(
            "time bounds require shared form factors g1 = g2 = g and f1 = f2 = f".into(),
        ))
    })?;
    let rho0 = ctx.rho0()?;
    let p = ctx.cfg.p()?.expect("initial state present");
    let consts = ctx.cfg.constants;
    // Hypotheses first, so that p = 0, 1 and vanishing rates are reported
    // before any calibration work.
    death_time_bound_with(&rates, model.varkappa(), p, consts.c_a, consts.kappa0)?;
    if consts.calibrate {
        info!("calibrating C_A, C_B");
    }
    let calibration = if consts.calibrate {
        Some(calibrate(&[CalibrationCase { cfg: model, p }], consts.kappa0, &ctx.quad)?)
    } else {
        None
    };
    let (c_a, c_b) = calibration.map_or((consts.c_a, consts.c_b), |c| (c.c_a, c.c_b));
    let t_a = death_time_bound_with(&rates, model.varkappa(), p, c_a, consts.kappa0)?;
    let t_b = survival_time_bound_with(&rates, model.varkappa(), p, c_b, consts.kappa0)?;
    let table = ResonanceTable::from_spectra(&model, &ctx.spectra)?;
    let t_max = ctx.t_max()?;
    info!("searching for the death time up to t = {t_max:e}");
    let t0 = numerical_death_time(&model, &table, &rho0, t_max, ctx.cfg.time.steps.max(CALIBRATION_GRID))?;
    let mut report = ctx.report("bounds");
    report.bounds = Some(TimeBounds { t_a, t_b, c_a, c_b });
    report.empirical_death_time = t0;
    report.ordering = t0.map(|t0| OrderingFlags {
        t_b_le_t0: t_b <= t0,
        t0_le_t_a: t0 <= t_a,
    });
    if t0.is_none() {
        report.notes.push(format!("no entanglement death found up to t = {t_max:e}"));
    }
    report.calibration = calibration;
    write_file(&args.out_dir, &ctx.cfg.outputs.summary, &to_json(&report))?;
    Ok(report)
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let result = match &cli.command {
        Command::Rates(a) => cmd_rates(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
