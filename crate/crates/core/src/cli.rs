//! Command-line front end: `steady`, `sweep` and `validate`.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 bad input or
//! configuration, 3 solver failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{chain_closed_form_dephased, lattice_current, ChainParams};
use crate::dynamics::{
    evolve_to_steady_state, operator_norm, solve_steady_state_with, spectral_abscissa, AnomalousMoments,
    EvolveOptions, FirstMoments, MomentMatrix, SolverInfo, SteadyOptions,
};
use crate::error::{Error, Result};
use crate::experiments::{
    dimension_study, fit_line, sweep_dephasing, sweep_length, DimensionRow, SweepAxis, SweepOptions,
    SweepResult, DEFAULT_NUMERIC_CAP,
};
use crate::export;
use crate::model::{build_lattice_generator, validate_spec, GeneratorParts, LatticeSpec, Severity};
use crate::observables::{separability_certificate, ObservableReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Thresholds used by `validate`, independent of the solver tolerance.
const CHECK_RESIDUAL: f64 = 1e-10;
const CHECK_CLOSED_FORM: f64 = 1e-9;
const CHECK_RELATIVE: f64 = 1e-10;
const CHECK_REAL_COHERENCE: f64 = 1e-12;
const CHECK_EVOLVE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Vectorized linear solve.
    #[default]
    Direct,
    /// Time integration from `C = 0` until `dC/dt` is small.
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: Method,
    /// Residual tolerance relative to `||M||`.
    pub tol: f64,
    /// Time step for `evolve`; defaults to a fraction of the fastest rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_final: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Direct,
            tol: 1e-10,
            dt: None,
            t_final: 1e5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Sweep values: numbers for the length and dephasing axes, shapes for the
/// dimension axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    Scalars(Vec<f64>),
    Shapes(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: SweepValues,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: LatticeSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn new(spec: LatticeSpec) -> Self {
        Self {
            spec,
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
            sweep: None,
        }
    }

    /// Accepts a full run configuration, a bare lattice spec, or a JSON
    /// document previously written by this tool (which embeds its config
    /// under `"config"`).
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        if let Some(inner) = obj.get("config") {
            Ok(serde_json::from_value(inner.clone())?)
        } else if obj.contains_key("spec") {
            Ok(serde_json::from_value(value)?)
        } else {
            Ok(Self::new(serde_json::from_value(value)?))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Parser)]
#[command(name = "harmonic-lattice", version, about = "Steady states and heat currents of boundary-driven oscillator lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration or bare lattice spec.
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the config's output path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Length,
    Dephasing,
    Dimension,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the steady state and report observables.
    Steady(Common),
    /// Sweep chain length, dephasing rate or lattice shape.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        /// JSON array or comma-separated list; shapes as `4x4,3x3x3`.
        #[arg(long)]
        values: Option<String>,
        /// Power-law fit window `LO:HI`.
        #[arg(long)]
        fit: Option<String>,
        /// Largest lattice handed to the numerical solver.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Cross-check solvers, closed forms and invariants.
    Validate(Common),
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonUniqueSteadyState(_) | Error::ResidualTooLarge { .. } | Error::NonFinite { .. } => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match command {
        Command::Steady(common) => {
            let config = prepare(&common, stderr)?;
            let text = steady_document(&config)?;
            emit(&common, &config, &text, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            common,
            axis,
            values,
            fit,
            cap,
        } => {
            let mut config = prepare(&common, stderr)?;
            config.sweep = Some(merge_sweep(config.sweep.take(), axis, values, fit, cap)?);
            let text = sweep_document(&config)?;
            emit(&common, &config, &text, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Validate(common) => {
            let config = prepare(&common, stderr)?;
            let checks = run_checks(&config)?;
            let table = check_table(&checks);
            write!(stdout, "{table}").map_err(Error::from)?;
            if common.out.is_some() || config.output.path.is_some() {
                let text = checks_document(&config, &checks)?;
                emit(&common, &config, &text, &mut std::io::sink())?;
            }
            Ok(if checks.iter().all(|c| c.status != CheckStatus::Fail) {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn prepare(common: &Common, stderr: &mut dyn Write) -> std::result::Result<RunConfig, Failure> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(f) = common.format {
        config.output.format = f;
    }
    let diagnostics = validate_spec(&config.spec);
    for d in &diagnostics {
        if d.severity == Severity::Warning {
            let _ = writeln!(stderr, "{d}");
        }
    }
    if let Some(d) = diagnostics.into_iter().find(|d| d.severity == Severity::Error) {
        return Err(input_error(d.message));
    }
    let s = &config.solver;
    if !(s.tol > 0.0 && s.tol.is_finite()) {
        return Err(input_error(format!("solver tol must be positive, got {}", s.tol)));
    }
    if !(s.t_final > 0.0 && s.t_final.is_finite()) {
        return Err(input_error(format!("solver t_final must be positive, got {}", s.t_final)));
    }
    if let Some(dt) = s.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(input_error(format!("solver dt must be positive, got {dt}")));
        }
    }
    Ok(config)
}

fn emit(common: &Common, config: &RunConfig, text: &str, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    match common.out.as_ref().or(config.output.path.as_ref()) {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| input_error(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::from(Error::from(e))),
    }
}

fn to_json(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Steady state from the configured method, with its residual and solver
/// description.
struct Solved {
    c: MomentMatrix,
    residual: f64,
    residual_bound: f64,
    solver: SolverInfo,
    evolve_time: Option<f64>,
}

fn solve(config: &RunConfig, g: &GeneratorParts) -> Result<Solved> {
    match config.solver.method {
        Method::Direct => {
            let ss = solve_steady_state_with(
                g,
                &SteadyOptions {
                    tol: config.solver.tol,
                    ..SteadyOptions::default()
                },
            )?;
            Ok(Solved {
                c: ss.c,
                residual: ss.residual,
                residual_bound: ss.residual_bound,
                solver: ss.solver,
                evolve_time: None,
            })
        }
        Method::Evolve => {
            let r = relax(config, g)?;
            let bound = config.solver.tol * g.pumping_norm();
            if !r.converged {
                return Err(Error::ResidualTooLarge {
                    residual: r.residual,
                    bound,
                });
            }
            let n = g.n_sites();
            Ok(Solved {
                c: r.c,
                residual: r.residual,
                residual_bound: bound,
                solver: SolverInfo {
                    method: "evolve".into(),
                    dimension: n * n,
                    bandwidth: None,
                    elapsed: Default::default(),
                },
                evolve_time: Some(r.time),
            })
        }
    }
}

fn relax(config: &RunConfig, g: &GeneratorParts) -> Result<crate::dynamics::Relaxed> {
    let n = g.n_sites();
    let dt = config.solver.dt.unwrap_or_else(|| EvolveOptions::default_dt(g));
    evolve_to_steady_state(&MomentMatrix::zeros(n), g, dt, config.solver.t_final, config.solver.tol)
}

/// Closed-form comparison, available when the transport axis has at least
/// three sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct ClosedFormComparison {
    j_chain: f64,
    j_formula: f64,
    /// Largest entry of `|C - C_closed|`, for chains only.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
}

fn closed_form_comparison(spec: &LatticeSpec, c: &MomentMatrix) -> Result<Option<ClosedFormComparison>> {
    let params = ChainParams::from_spec(spec)?;
    if params.n_sites < 3 || spec.coupling == 0.0 {
        return Ok(None);
    }
    let closed = chain_closed_form_dephased(&params)?;
    let max_deviation = (spec.dims.len() == 1).then(|| {
        (c.matrix() - closed.moment_matrix().matrix())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    });
    Ok(Some(ClosedFormComparison {
        j_chain: closed.current,
        j_formula: lattice_current(&spec.dims, closed.current),
        max_deviation,
    }))
}

fn steady_document(config: &RunConfig) -> std::result::Result<String, Failure> {
    let g = build_lattice_generator(&config.spec)?;
    let solved = solve(config, &g)?;
    let report = ObservableReport::measure(&solved.c, &config.spec, &g)?;
    let closed = closed_form_comparison(&config.spec, &solved.c)?;
    Ok(match config.output.format {
        Format::Json => to_json(&json!({
            "config": config,
            "steady": {
                "c": solved.c,
                "residual": solved.residual,
                "residual_bound": solved.residual_bound,
                "solver": solved.solver,
                "evolve_time": solved.evolve_time,
            },
            "observables": report,
            "closed_form": closed,
        }))?,
        Format::Csv => {
            let f = export::fmt_f64;
            let mut rows = vec![
                ("dims", export::dims_label(&config.spec.dims)),
                ("method", solved.solver.method.clone()),
                ("residual", f(solved.residual)),
                ("residual_bound", f(solved.residual_bound)),
                ("j_hot", f(report.j_hot)),
                ("j_cold", f(report.j_cold)),
                ("deph_current", f(report.deph_current)),
                ("coherence_real_max", f(report.coherence_real_max)),
                ("psd_min_eig", f(report.psd_min_eig)),
            ];
            if let Some(q) = report.transverse_coherence {
                rows.push(("transverse_coherence", f(q)));
            }
            if let Some(t) = solved.evolve_time {
                rows.push(("evolve_time", f(t)));
            }
            if let Some(cf) = &closed {
                rows.push(("j_closed_chain", f(cf.j_chain)));
                rows.push(("j_closed_formula", f(cf.j_formula)));
                if let Some(d) = cf.max_deviation {
                    rows.push(("closed_form_max_deviation", f(d)));
                }
            }
            let mut out = String::new();
            export::scalars_csv(&mut out, &rows);
            export::profile_csv(&mut out, &report.occupations, &report.temperatures);
            export::bonds_csv(&mut out, &report);
            export::moments_csv(&mut out, &solved.c);
            out
        }
    })
}

fn parse_values(axis: SweepAxis, text: &str) -> std::result::Result<SweepValues, Failure> {
    let text = text.trim();
    if text.starts_with('[') {
        let v: SweepValues =
            serde_json::from_str(text).map_err(|e| input_error(format!("invalid --values: {e}")))?;
        return Ok(v);
    }
    let items = text.split(',').map(str::trim).filter(|s| !s.is_empty());
    match axis {
        SweepAxis::Dimension => items
            .map(|s| {
                s.split('x')
                    .map(|d| d.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| input_error(format!("invalid shape {s:?}; expected e.g. 4x4")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(SweepValues::Shapes),
        _ => items
            .map(|s| s.parse::<f64>().map_err(|_| input_error(format!("invalid value {s:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(SweepValues::Scalars),
    }
}

fn parse_window(text: &str) -> std::result::Result<[f64; 2], Failure> {
    let bad = || input_error(format!("invalid --fit {text:?}; expected LO:HI"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok([lo, hi])
}

fn merge_sweep(
    base: Option<SweepConfig>,
    axis: Option<AxisArg>,
    values: Option<String>,
    fit: Option<String>,
    cap: Option<usize>,
) -> std::result::Result<SweepConfig, Failure> {
    let axis = match (axis, &base) {
        (Some(AxisArg::Length), _) => SweepAxis::Length,
        (Some(AxisArg::Dephasing), _) => SweepAxis::Dephasing,
        (Some(AxisArg::Dimension), _) => SweepAxis::Dimension,
        (None, Some(b)) => b.axis,
        (None, None) => return Err(input_error("sweep needs --axis (or a sweep block in the config)")),
    };
    let values = match (values, &base) {
        (Some(text), _) => parse_values(axis, &text)?,
        (None, Some(b)) if b.axis == axis => b.values.clone(),
        _ => return Err(input_error("sweep needs --values (or a sweep block in the config)")),
    };
    let fit = match fit {
        Some(text) => Some(parse_window(&text)?),
        None => base.as_ref().and_then(|b| b.fit),
    };
    let cap = cap.or(base.as_ref().and_then(|b| b.cap));
    Ok(SweepConfig { axis, values, fit, cap })
}

enum SweepOutput {
    Curve(SweepResult),
    Table(Vec<DimensionRow>),
}

fn run_sweep(config: &RunConfig) -> std::result::Result<SweepOutput, Failure> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| input_error("no sweep requested"))?;
    let mut opts = SweepOptions::default().with_cap(sweep.cap.unwrap_or(DEFAULT_NUMERIC_CAP));
    if let Some([lo, hi]) = sweep.fit {
        opts = opts.with_fit(lo, hi);
    }
    let spec = &config.spec;
    match (sweep.axis, &sweep.values) {
        (SweepAxis::Length, SweepValues::Scalars(v)) => {
            let lengths = v
                .iter()
                .map(|&x| {
                    if x >= 1.0 && x.fract() == 0.0 {
                        Ok(x as usize)
                    } else {
                        Err(input_error(format!("chain lengths must be positive integers, got {x}")))
                    }
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(SweepOutput::Curve(sweep_length(spec, &lengths, spec.dephasing_rate, &opts)?))
        }
        (SweepAxis::Dephasing, SweepValues::Scalars(v)) => Ok(SweepOutput::Curve(sweep_dephasing(spec, v, &opts)?)),
        (SweepAxis::Dimension, SweepValues::Shapes(shapes)) => {
            if sweep.fit.is_some() {
                return Err(input_error("--fit applies to the length and dephasing axes only"));
            }
            Ok(SweepOutput::Table(dimension_study(spec, shapes, &opts)?))
        }
        (SweepAxis::Dimension, _) => Err(input_error("dimension sweep values must be shapes such as [[4,4],[3,3,3]]")),
        _ => Err(input_error("length and dephasing sweep values must be numbers")),
    }
}

fn sweep_document(config: &RunConfig) -> std::result::Result<String, Failure> {
    let result = run_sweep(config)?;
    Ok(match (config.output.format, result) {
        (Format::Json, SweepOutput::Curve(s)) => to_json(&json!({ "config": config, "sweep": s }))?,
        (Format::Json, SweepOutput::Table(rows)) => to_json(&json!({ "config": config, "dimension": rows }))?,
        (Format::Csv, SweepOutput::Curve(s)) => {
            let mut out = String::new();
            export::sweep_csv(&mut out, &s);
            out
        }
        (Format::Csv, SweepOutput::Table(rows)) => {
            let mut out = String::new();
            export::dimension_csv(&mut out, &rows);
            out
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self {
            name,
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        }
    }

    fn skip(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: CheckStatus::Skip,
            detail: detail.into(),
        }
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        value.abs()
    } else {
        value.abs() / scale.abs()
    }
}

/// Every cross-check `validate` performs, in table order.
pub fn run_checks(config: &RunConfig) -> Result<Vec<Check>> {
    let spec = &config.spec;
    let g = build_lattice_generator(spec)?;
    let lattice = spec.lattice()?;
    let m_norm = g.pumping_norm();
    let mut checks = Vec::new();

    let abscissa = spectral_abscissa(&g);
    checks.push(Check::new(
        "unique steady state",
        abscissa < 0.0,
        format!("spectral abscissa of the first-moment generator {abscissa:.3e}"),
    ));

    let direct = solve_steady_state_with(
        &g,
        &SteadyOptions {
            tol: config.solver.tol,
            ..SteadyOptions::default()
        },
    )?;
    let c = &direct.c;
    checks.push(Check::new(
        "direct residual",
        direct.residual <= CHECK_RESIDUAL * m_norm,
        format!("{:.3e} vs {:.3e}", direct.residual, CHECK_RESIDUAL * m_norm),
    ));

    let max_c = c.max_abs();
    let herm = c.hermitian_defect();
    checks.push(Check::new(
        "hermitian",
        herm <= 1e-12 * max_c,
        format!("defect {herm:.3e}"),
    ));
    let cert = separability_certificate(c, &AnomalousMoments::zeros(c.dim()), &FirstMoments::zeros(c.dim()), CHECK_RESIDUAL);
    checks.push(Check::new(
        "positive semidefinite",
        cert.min_eigenvalue >= -CHECK_RESIDUAL,
        format!("min eigenvalue {:.6e}", cert.min_eigenvalue),
    ));
    checks.push(Check::new(
        "separability certificate",
        cert.is_certified() && abscissa < 0.0,
        if cert.violations.is_empty() {
            "first and anomalous moments decay to zero; covariance PSD".into()
        } else {
            cert.violations.join("; ")
        },
    ));

    let report = ObservableReport::measure(c, spec, &g)?;
    let scale = report.j_hot.abs();
    let balance = relative(report.j_hot + report.j_cold, scale);
    checks.push(Check::new(
        "current balance",
        balance <= CHECK_RELATIVE,
        format!("|J_hot + J_cold| / |J_hot| = {balance:.3e}"),
    ));
    let deph = relative(report.deph_current, scale);
    checks.push(Check::new(
        "dephasing current",
        deph <= CHECK_RELATIVE,
        format!("|J_deph| / |J_hot| = {deph:.3e}"),
    ));
    let per_chain = report.j_hot / lattice.transverse_volume() as f64;
    let bond_gap = report
        .j_bond
        .iter()
        .flatten()
        .map(|b| relative(b - per_chain, per_chain))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "bond currents",
        bond_gap <= CHECK_RELATIVE,
        format!("max relative gap to J_hot / transverse volume {bond_gap:.3e}"),
    ));
    checks.push(Check::new(
        "real coherence",
        report.coherence_real_max <= CHECK_REAL_COHERENCE * max_c,
        format!("max |Re C_jk| = {:.3e}", report.coherence_real_max),
    ));
    if let Some(q) = report.transverse_coherence {
        checks.push(Check::new(
            "transverse coherence",
            q <= CHECK_RESIDUAL,
            format!("max |C_ij| across chains {q:.3e}"),
        ));
    }

    match closed_form_comparison(spec, c)? {
        Some(cf) => {
            let gap = relative(report.j_hot - cf.j_formula, cf.j_formula);
            let dev = cf.max_deviation.unwrap_or(0.0);
            checks.push(Check::new(
                "closed form",
                gap <= CHECK_CLOSED_FORM && dev <= CHECK_CLOSED_FORM,
                match cf.max_deviation {
                    Some(d) => format!("current gap {gap:.3e}, max |C - C_closed| {d:.3e}"),
                    None => format!("volume-law current gap {gap:.3e}"),
                },
            ));
        }
        None => checks.push(Check::skip("closed form", "needs at least 3 sites along the transport axis")),
    }

    checks.push(profile_check(spec, c, &lattice)?);

    let relaxed = relax(config, &g)?;
    let evolve_bound = CHECK_RESIDUAL * m_norm;
    checks.push(Check::new(
        "evolve residual",
        relaxed.residual <= evolve_bound,
        format!(
            "{:.3e} vs {:.3e} at t = {}",
            relaxed.residual, evolve_bound, relaxed.time
        ),
    ));
    let gap = operator_norm(&(relaxed.c.matrix() - c.matrix()));
    checks.push(Check::new(
        "evolve agrees with direct",
        gap <= CHECK_EVOLVE,
        format!("||C_evolve - C_direct|| = {gap:.3e}"),
    ));
    Ok(checks)
}

/// Flat bulk without dephasing, a straight line with it. Checked on the
/// first transport chain.
fn profile_check(spec: &LatticeSpec, c: &MomentMatrix, lattice: &crate::model::Lattice) -> Result<Check> {
    let chain = &lattice.chains()[0];
    if chain.len() < 4 {
        return Ok(Check::skip("bulk profile", "needs at least two bulk sites"));
    }
    let bulk: Vec<f64> = chain[1..chain.len() - 1].iter().map(|&j| c.get(j, j).re).collect();
    Ok(if spec.dephasing_rate == 0.0 {
        let (lo, hi) = bulk
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        Check::new("bulk profile", hi - lo <= CHECK_RESIDUAL, format!("flat, spread {:.3e}", hi - lo))
    } else {
        let x: Vec<f64> = (0..bulk.len()).map(|k| k as f64).collect();
        let fit = fit_line(&x, &bulk)?;
        Check::new(
            "bulk profile",
            fit.residual <= CHECK_RESIDUAL,
            format!("linear, slope {:.6e}, residual {:.3e}", fit.slope, fit.residual),
        )
    })
}

pub fn check_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
        };
        out.push_str(&format!("{tag}  {:<width$}  {}\n", c.name, c.detail));
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        out.push_str("all checks passed\n");
    } else {
        out.push_str(&format!("failed: {}\n", failed.join(", ")));
    }
    out
}

fn checks_document(config: &RunConfig, checks: &[Check]) -> Result<String> {
    Ok(match config.output.format {
        Format::Json => to_json(&json!({ "config": config, "checks": checks }))?,
        Format::Csv => {
            let mut out = String::from("name,status,detail\n");
            for c in checks {
                let status = serde_json::to_value(c.status)?;
                out.push_str(&format!(
                    "{},{},\"{}\"\n",
                    c.name,
                    status.as_str().unwrap_or_default(),
                    c.detail.replace('"', "\"\"")
                ));
            }
            out
        }
    })
}
