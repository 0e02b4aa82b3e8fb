//! Batch front end: JSON run configurations in, JSON reports and CSV tables
//! out.
//!
//! A configuration selects one of five modes:
//!
//! | mode       | report                                                  | extra files            |
//! |------------|---------------------------------------------------------|------------------------|
//! | `solve`    | eigen certificate, stress, shift, diagnostics           | field CSV (optional)   |
//! | `spectrum` | eigen certificate with the dense spectrum               |                        |
//! | `sweep`    | material functions over a list of `wi`                  | sweep CSV              |
//! | `oracle`   | Monte Carlo moments and stress from the dumbbell SDE    |                        |
//! | `compare`  | Galerkin vs Monte Carlo, deltas in standard errors      |                        |
//!
//! Defaults: `n = 2`, `delta = 8`, `b = 1`, `mu = 1`, drift `none`,
//! `degree = 16`, `quadrature_margin = 0`, `tol = 1e-10`, `max_iter = 50000`,
//! `seed = 0`, `report_path = "report.json"`, `sweep_csv_path = "sweep.csv"`,
//! field grid 200 x 200. SDE defaults are those of [`SdeConfig`].
//!
//! Reports contain no timestamps or host data, so equal configurations give
//! byte-identical files. Exit codes: 0 success, 2 invalid configuration,
//! 3 non-convergence (power iteration or SDE step control), 1 anything else.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{full_spectrum, principal_eigenpair_on_grid, EigenReport, SolverConfig, DENSE_LIMIT};
use crate::error::{FeneError, Result};
use crate::model::{DriftField, FeneParams};
use crate::observables::{
    kramers_stress, material_functions, second_moment, GridSpec, MaterialFunctions, StressTensor,
};
use crate::problem::{Problem, ProblemOptions};
use crate::sde::{simulate_stationary, OracleSummary, SdeConfig};

/// Environment variable capping the worker threads used by sweeps and SDE
/// path ensembles.
pub const THREADS_ENV: &str = "FENE_FPS_THREADS";

/// Highest polynomial degree accepted from a configuration.
pub const MAX_DEGREE: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Solve,
    Spectrum,
    Sweep,
    Oracle,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n: usize,
    pub delta: f64,
    pub b: f64,
    pub mu: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = FeneParams::default();
        ModelSection {
            n: p.n,
            delta: p.delta,
            b: p.b,
            mu: p.mu,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriftSpec {
    #[default]
    None,
    /// `k(x) = wi * A x` with `A` given row-major.
    Linear {
        matrix: Vec<f64>,
        #[serde(default = "one")]
        wi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Discretization {
    pub degree: usize,
    pub quadrature_margin: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            degree: 16,
            quadrature_margin: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Replaces the minimal admissible shift; a warning is attached when the
    /// value is below it.
    pub alpha: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            tol: s.tol,
            max_iter: s.max_iter,
            seed: s.seed,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldGrid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for FieldGrid {
    fn default() -> Self {
        let g = GridSpec::default();
        FieldGrid {
            n_r: g.n_r,
            n_theta: g.n_theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub report_path: String,
    pub field_csv_path: Option<String>,
    pub sweep_csv_path: String,
    pub sweep_values: Vec<f64>,
    /// Polar grid for ratio bounds and the field CSV.
    pub field_grid: FieldGrid,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            report_path: "report.json".into(),
            field_csv_path: None,
            sweep_csv_path: "sweep.csv".into(),
            sweep_values: Vec::new(),
            field_grid: FieldGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub drift: DriftSpec,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sde: SdeConfig,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses and validates JSON, reporting the offending field path on
    /// failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg = Self::parse(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Schema check only; invariants are left to [`RunConfig::validate`] so
    /// that command-line overrides can be applied first.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." || path == "?" { "config".to_string() } else { path };
            FeneError::param(field, e.into_inner().to_string())
        })
    }

    /// Reads and parses a configuration file without validating it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| FeneError::param("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn params(&self) -> FeneParams {
        FeneParams {
            n: self.model.n,
            delta: self.model.delta,
            b: self.model.b,
            mu: self.model.mu,
        }
    }

    /// The drift with the multiplier already applied, `A = wi * A_base`.
    pub fn drift_field(&self) -> Result<DriftField> {
        let n = self.model.n;
        match &self.drift {
            DriftSpec::None => Ok(DriftField::none(n)),
            DriftSpec::Linear { matrix, wi } => {
                let scaled: Vec<f64> = matrix.iter().map(|v| v * wi).collect();
                DriftField::from_row_major(n, &scaled)
            }
        }
    }

    /// Base velocity gradient (without `wi`), for sweeps.
    pub fn base_matrix(&self) -> Option<DMatrix<f64>> {
        match &self.drift {
            DriftSpec::None => None,
            DriftSpec::Linear { matrix, .. } => {
                Some(DMatrix::from_row_slice(self.model.n, self.model.n, matrix))
            }
        }
    }

    pub fn problem_options(&self) -> ProblemOptions {
        ProblemOptions {
            degree: self.discretization.degree,
            quadrature_margin: self.discretization.quadrature_margin,
            alpha_override: self.solver.alpha,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            seed: self.solver.seed,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.output.field_grid.n_r, self.output.field_grid.n_theta)
    }

    /// Checks every invariant; the first violation is returned with its
    /// field path.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n != 2 {
            return Err(FeneError::param(
                "model.n",
                format!("only n = 2 is supported (got {})", m.n),
            ));
        }
        self.params().validate()?;

        match &self.drift {
            DriftSpec::None => {}
            DriftSpec::Linear { matrix, wi } => {
                if !wi.is_finite() {
                    return Err(FeneError::param("drift.wi", "must be finite"));
                }
                if matrix.len() != m.n * m.n {
                    return Err(FeneError::param(
                        "drift.matrix",
                        format!("expected {} entries, got {}", m.n * m.n, matrix.len()),
                    ));
                }
                self.drift_field()?;
                DriftField::from_row_major(m.n, matrix)?;
            }
        }

        let d = &self.discretization;
        if d.degree > MAX_DEGREE {
            return Err(FeneError::param(
                "discretization.degree",
                format!("must be <= {MAX_DEGREE}"),
            ));
        }
        if d.quadrature_margin > 64 {
            return Err(FeneError::param("discretization.quadrature_margin", "must be <= 64"));
        }
        if self.mode == Mode::Spectrum {
            let dim = (d.degree + 1) * (d.degree + 2) / 2;
            if dim > DENSE_LIMIT {
                return Err(FeneError::param(
                    "discretization.degree",
                    format!("spectrum mode needs basis dimension <= {DENSE_LIMIT} (got {dim})"),
                ));
            }
        }

        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(FeneError::param("solver.tol", "must be finite and > 0"));
        }
        if s.max_iter == 0 {
            return Err(FeneError::param("solver.max_iter", "must be >= 1"));
        }
        if let Some(a) = s.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(FeneError::param("solver.alpha", "must be finite and > 0"));
            }
        }

        if matches!(self.mode, Mode::Oracle | Mode::Compare) {
            self.sde.validate()?;
        }

        let o = &self.output;
        if o.report_path.is_empty() {
            return Err(FeneError::param("output.report_path", "must not be empty"));
        }
        if o.field_grid.n_r < 2 {
            return Err(FeneError::param("output.field_grid.n_r", "must be >= 2"));
        }
        if o.field_grid.n_theta < 1 {
            return Err(FeneError::param("output.field_grid.n_theta", "must be >= 1"));
        }
        if self.mode == Mode::Sweep {
            if !matches!(self.drift, DriftSpec::Linear { .. }) {
                return Err(FeneError::param("drift.type", "sweep mode needs a linear drift"));
            }
            if o.sweep_values.is_empty() {
                return Err(FeneError::param("output.sweep_values", "sweep mode needs at least one value"));
            }
            for (i, v) in o.sweep_values.iter().enumerate() {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(FeneError::param(
                        format!("output.sweep_values[{i}]"),
                        "must be finite and > 0",
                    ));
                }
            }
            if o.sweep_csv_path.is_empty() {
                return Err(FeneError::param("output.sweep_csv_path", "must not be empty"));
            }
        }
        Ok(())
    }
}

/// Exit code for an error: 2 for invalid input, 3 for non-convergence.
pub fn exit_code(err: &FeneError) -> u8 {
    match err {
        FeneError::InvalidParameter { .. }
        | FeneError::UnsupportedDimension(_)
        | FeneError::DimensionMismatch { .. }
        | FeneError::NoJ0(_)
        | FeneError::DimensionTooLarge { .. }
        | FeneError::Json(_) => 2,
        FeneError::NotConverged { .. } | FeneError::StepSize { .. } | FeneError::EigenFailure(_) => 3,
        _ => 1,
    }
}

#[derive(Debug, Serialize)]
struct Diagnostic<'a> {
    status: &'static str,
    exit_code: u8,
    kind: &'static str,
    field: Option<&'a str>,
    message: String,
}

/// One-line JSON diagnostic for standard error.
pub fn diagnostic_json(err: &FeneError) -> String {
    let code = exit_code(err);
    let kind = match code {
        2 => "validation",
        3 => "convergence",
        _ => "runtime",
    };
    let field = match err {
        FeneError::InvalidParameter { field, .. } => Some(field.as_str()),
        FeneError::UnsupportedDimension(_) => Some("model.n"),
        _ => None,
    };
    let d = Diagnostic {
        status: "error",
        exit_code: code,
        kind,
        field,
        message: err.to_string(),
    };
    serde_json::to_string(&d).unwrap_or_else(|_| "{\"status\":\"error\"}".into())
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub program: &'static str,
    pub version: &'static str,
    pub mode: Mode,
    pub config: RunConfig,
}

impl Metadata {
    fn new(cfg: &RunConfig) -> Self {
        Metadata {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            mode: cfg.mode,
            config: cfg.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Setup {
    pub basis_dim: usize,
    pub lambda0: f64,
    pub alpha: f64,
    pub k_sup: f64,
    pub condition: f64,
    pub quadrature_residual: f64,
    pub warnings: Vec<String>,
}

impl Setup {
    fn of(problem: &Problem) -> Self {
        Setup {
            basis_dim: problem.basis.len(),
            lambda0: problem.alpha.lambda0,
            alpha: problem.alpha.alpha,
            k_sup: problem.drift.k_sup(),
            condition: problem.mats.condition,
            quadrature_residual: problem.mats.quadrature_residual,
            warnings: problem.warnings(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub metadata: Metadata,
    pub setup: Setup,
    pub eigen: EigenReport,
    pub stress: StressTensor,
    pub second_moment: f64,
    /// Relative `L^2_M` distance between the solution and `b M / Z`.
    pub distance_to_equilibrium: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub metadata: Metadata,
    pub setup: Setup,
    pub eigen: EigenReport,
    pub principal_dense: [f64; 2],
    /// Distance from the principal eigenvalue to the nearest other one.
    pub principal_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub points: Vec<MaterialFunctions>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub metadata: Metadata,
    pub oracle: OracleSummary,
    /// `<|x|^2> = 1 / (delta + 2)`, listed for zero drift only.
    pub equilibrium_second_moment: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Delta {
    pub quantity: String,
    pub galerkin: f64,
    pub oracle: f64,
    pub std_error: f64,
    /// `(galerkin - oracle) / std_error`.
    pub delta_se: f64,
}

impl Delta {
    fn new(quantity: impl Into<String>, galerkin: f64, oracle: f64, std_error: f64) -> Self {
        let diff = galerkin - oracle;
        let delta_se = if std_error > 0.0 {
            diff / std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        Delta {
            quantity: quantity.into(),
            galerkin,
            oracle,
            std_error,
            delta_se,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub metadata: Metadata,
    pub setup: Setup,
    pub eigen: EigenReport,
    pub oracle: OracleSummary,
    pub deltas: Vec<Delta>,
    pub max_abs_delta_se: f64,
}

/// Everything a run produces, before it touches the file system.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: String,
    pub field_csv: Option<String>,
    pub sweep_csv: Option<String>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn field_csv(field: &crate::basis::DistributionField, grid: &GridSpec) -> String {
    let polar = grid.polar_points();
    let pts = grid.points();
    let vals = field.evaluate(&pts);
    let mut out = String::from("r,theta,psi,ratio\n");
    for ((r, t), v) in polar.iter().zip(&vals) {
        let _ = writeln!(out, "{r},{t},{},{}", v.psi, v.ratio);
    }
    out
}

fn solve(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.params();
    let problem = Problem::with_options(params, cfg.drift_field()?, cfg.problem_options())?;
    let grid = cfg.grid();
    let (field, eigen) = principal_eigenpair_on_grid(&problem, &cfg.solver_config(), &grid)?;
    let report = SolveReport {
        metadata: Metadata::new(cfg),
        setup: Setup::of(&problem),
        stress: kramers_stress(&field, &params)?,
        second_moment: second_moment(&field)?,
        distance_to_equilibrium: field.relative_l2m_distance(&problem.equilibrium()),
        eigen,
    };
    Ok(RunOutput {
        report: to_json(&report)?,
        field_csv: cfg.output.field_csv_path.as_ref().map(|_| field_csv(&field, &grid)),
        sweep_csv: None,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<RunOutput> {
    let problem = Problem::with_options(cfg.params(), cfg.drift_field()?, cfg.problem_options())?;
    let (_, mut eigen) = principal_eigenpair_on_grid(&problem, &cfg.solver_config(), &cfg.grid())?;
    let spec = full_spectrum(&problem.mats)?;
    eigen.min_real_part = Some(spec.min_real_part());
    eigen.spectrum = spec.as_pairs();
    let p = spec.principal();
    let report = SpectrumReport {
        metadata: Metadata::new(cfg),
        setup: Setup::of(&problem),
        eigen,
        principal_dense: [p.re, p.im],
        principal_gap: spec.principal_gap(),
    };
    Ok(RunOutput {
        report: to_json(&report)?,
        field_csv: None,
        sweep_csv: None,
    })
}

fn sweep(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.params();
    let base = cfg
        .base_matrix()
        .ok_or_else(|| FeneError::param("drift.type", "sweep mode needs a linear drift"))?;
    let opts = cfg.problem_options();
    let solver = cfg.solver_config();
    let points: Vec<MaterialFunctions> = cfg
        .output
        .sweep_values
        .par_iter()
        .map(|&wi| material_functions(&base, wi, &params, opts, &solver))
        .collect::<Result<_>>()?;
    let mut csv = String::from("wi,S11,S12,S22,eta_p,psi1\n");
    for p in &points {
        let s = &p.stress;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            p.wi,
            s.get(0, 0),
            s.get(0, 1),
            s.get(1, 1),
            p.eta_p,
            p.psi1
        );
    }
    let report = SweepReport {
        metadata: Metadata::new(cfg),
        points,
    };
    Ok(RunOutput {
        report: to_json(&report)?,
        field_csv: None,
        sweep_csv: Some(csv),
    })
}

fn oracle(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.params();
    let ens = simulate_stationary(&params, &cfg.drift_field()?, &cfg.sde)?;
    let report = OracleReport {
        metadata: Metadata::new(cfg),
        oracle: OracleSummary::new(&ens, &params),
        equilibrium_second_moment: matches!(cfg.drift, DriftSpec::None).then(|| 1.0 / (params.delta + 2.0)),
    };
    Ok(RunOutput {
        report: to_json(&report)?,
        field_csv: None,
        sweep_csv: None,
    })
}

const COMPONENT_NAMES: [&str; 4] = ["S11", "S12", "S21", "S22"];

fn compare(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.params();
    let drift = cfg.drift_field()?;
    let problem = Problem::with_options(params, drift.clone(), cfg.problem_options())?;
    let (field, eigen) = principal_eigenpair_on_grid(&problem, &cfg.solver_config(), &cfg.grid())?;
    let stress = kramers_stress(&field, &params)?;
    let ens = simulate_stationary(&params, &drift, &cfg.sde)?;
    let summary = OracleSummary::new(&ens, &params);

    let mut deltas = Vec::new();
    for i in 0..2 {
        for j in i..2 {
            let (v, se) = summary.stress.get(i, j);
            deltas.push(Delta::new(COMPONENT_NAMES[2 * i + j], stress.get(i, j), v, se));
        }
    }
    let (m2, m2_se) = summary.radial_moment.scalar();
    deltas.push(Delta::new("second_moment", second_moment(&field)?, m2, m2_se));
    let max_abs_delta_se = deltas.iter().map(|d| d.delta_se.abs()).fold(0.0, f64::max);

    let report = CompareReport {
        metadata: Metadata::new(cfg),
        setup: Setup::of(&problem),
        eigen,
        oracle: summary,
        deltas,
        max_abs_delta_se,
    };
    Ok(RunOutput {
        report: to_json(&report)?,
        field_csv: None,
        sweep_csv: None,
    })
}

/// Runs a validated configuration entirely in memory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Solve => solve(cfg),
        Mode::Spectrum => spectrum(cfg),
        Mode::Sweep => sweep(cfg),
        Mode::Oracle => oracle(cfg),
        Mode::Compare => compare(cfg),
    }
}

/// Reads the thread cap from the environment; `None` means no cap.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(FeneError::param(
                THREADS_ENV,
                format!("must be a positive integer (got {v:?})"),
            )),
        },
    }
}

/// Runs `execute` on a pool of at most `threads` workers.
pub fn execute_with_threads(cfg: &RunConfig, threads: Option<usize>) -> Result<RunOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| FeneError::EigenFailure(format!("thread pool: {e}")))?;
    pool.install(|| execute(cfg))
}

fn resolve(out_dir: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_dir.join(path)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Writes a run's artifacts below `out_dir` and returns their paths, report
/// first.
pub fn write_outputs(cfg: &RunConfig, out: &RunOutput, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let report = resolve(out_dir, &cfg.output.report_path);
    write_file(&report, &out.report)?;
    written.push(report);
    if let (Some(csv), Some(p)) = (&out.field_csv, &cfg.output.field_csv_path) {
        let path = resolve(out_dir, p);
        write_file(&path, csv)?;
        written.push(path);
    }
    if let Some(csv) = &out.sweep_csv {
        let path = resolve(out_dir, &cfg.output.sweep_csv_path);
        write_file(&path, csv)?;
        written.push(path);
    }
    Ok(written)
}

/// Command-line flags of the `fene-fps` binary.
#[derive(Debug, Clone, Parser)]
#[command(name = "fene-fps", version, about = "Steady FENE Fokker-Planck solver")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `mode` from the configuration.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Overrides `discretization.degree`.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Overrides both `solver.seed` and `sde.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory that relative output paths are resolved against.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl Cli {
    pub fn apply_overrides(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(d) = self.degree {
            cfg.discretization.degree = d;
        }
        if let Some(s) = self.seed {
            cfg.solver.seed = s;
            cfg.sde.seed = s;
        }
    }
}

#[derive(Serialize)]
struct Done<'a> {
    status: &'static str,
    mode: Mode,
    files: &'a [PathBuf],
}

fn run_cli_inner(cli: &Cli) -> Result<(Mode, Vec<PathBuf>)> {
    let mut cfg = RunConfig::load(&cli.config)?;
    cli.apply_overrides(&mut cfg);
    cfg.validate()?;
    let threads = thread_cap()?;
    let out = execute_with_threads(&cfg, threads)?;
    let files = write_outputs(&cfg, &out, &cli.out)?;
    Ok((cfg.mode, files))
}

/// Full CLI pipeline. Prints a JSON status line on stdout on success and a
/// JSON diagnostic on stderr on failure; returns the process exit code.
pub fn run_cli(cli: &Cli) -> u8 {
    match run_cli_inner(cli) {
        Ok((mode, files)) => {
            let done = Done {
                status: "ok",
                mode,
                files: &files,
            };
            println!("{}", serde_json::to_string(&done).unwrap_or_default());
            0
        }
        Err(e) => {
            eprintln!("{}", diagnostic_json(&e));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match RunConfig::from_json(text) {
            Err(FeneError::InvalidParameter { field, .. }) => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_object_gives_documented_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg.mode, Mode::Solve);
        assert_eq!(cfg.model.b, 1.0);
        assert_eq!(cfg.model.mu, 1.0);
        assert_eq!(cfg.model.delta, 8.0);
        assert_eq!(cfg.solver.tol, 1e-10);
        assert_eq!(cfg.discretization.degree, 16);
        assert_eq!(cfg.drift, DriftSpec::None);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        assert_eq!(field_of(r#"{"model": {"delta": 8, "beta": 2}}"#), "model.beta");
        assert_eq!(field_of(r#"{"colour": 1}"#), "colour");
        let f = field_of(r#"{"drift": {"type": "linear", "matrix": [0,1,0,0], "scale": 2}}"#);
        assert!(f.starts_with("drift"), "{f}");
    }

    #[test]
    fn invariant_violations_name_their_field() {
        assert_eq!(field_of(r#"{"model": {"delta": 0.5}}"#), "model.delta");
        assert_eq!(field_of(r#"{"model": {"b": -1}}"#), "model.b");
        assert_eq!(field_of(r#"{"model": {"n": 3}}"#), "model.n");
        assert_eq!(field_of(r#"{"solver": {"tol": 0}}"#), "solver.tol");
        assert_eq!(
            field_of(r#"{"drift": {"type": "linear", "matrix": [1,0,0,0]}}"#),
            "drift.matrix"
        );
        assert_eq!(
            field_of(r#"{"drift": {"type": "linear", "matrix": [0,1,0]}}"#),
            "drift.matrix"
        );
        assert_eq!(
            field_of(r#"{"mode": "spectrum", "discretization": {"degree": 24}}"#),
            "discretization.degree"
        );
        assert_eq!(field_of(r#"{"mode": "sweep"}"#), "drift.type");
        assert_eq!(
            field_of(r#"{"mode": "sweep", "drift": {"type": "linear", "matrix": [0,1,0,0]},
                "output": {"sweep_values": [0.1, -1]}}"#),
            "output.sweep_values[1]"
        );
        assert_eq!(
            field_of(r#"{"mode": "oracle", "sde": {"dt": 0}}"#),
            "sde.dt"
        );
        assert_eq!(field_of(r#"{"model": {"delta": "eight"}}"#), "model.delta");
        assert_eq!(field_of(r#"{"mode": "fast"}"#), "mode");
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&FeneError::param("x", "y")), 2);
        assert_eq!(
            exit_code(&FeneError::NotConverged {
                iterations: 1,
                residual: 1.0
            }),
            3
        );
        assert_eq!(exit_code(&FeneError::Io(std::io::Error::other("disk"))), 1);
        let d: serde_json::Value =
            serde_json::from_str(&diagnostic_json(&FeneError::param("model.b", "bad"))).unwrap();
        assert_eq!(d["field"], "model.b");
        assert_eq!(d["exit_code"], 2);
    }

    #[test]
    fn wi_multiplies_the_base_matrix() {
        let cfg = RunConfig::from_json(
            r#"{"drift": {"type": "linear", "matrix": [0, 1, 0, 0], "wi": 2.5}}"#,
        )
        .unwrap();
        let a = cfg.drift_field().unwrap().matrix().unwrap().clone();
        assert_eq!(a[(0, 1)], 2.5);
        assert_eq!(cfg.base_matrix().unwrap()[(0, 1)], 1.0);
    }

    #[test]
    fn solve_mode_writes_field_csv_header() {
        let cfg = RunConfig::from_json(
            r#"{"discretization": {"degree": 4},
                "output": {"field_csv_path": "f.csv", "field_grid": {"n_r": 3, "n_theta": 4}}}"#,
        )
        .unwrap();
        let out = execute(&cfg).unwrap();
        let csv = out.field_csv.unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,theta,psi,ratio"));
        assert_eq!(lines.count(), 12);
    }
}
