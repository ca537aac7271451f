//! Command-line front end. Exit codes: 0 on success, 1 on solver failure,
//! 2 on input errors. Diagnostics go to stderr as one JSON object per line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::benchmarks::{self, BendingConfig, Family, SweepQuantity, SweepSpec, TrussConfig};
use crate::criteria::{trace_to_csv, MohrCoulombParams, StrengthCriterion, TracePoint};
use crate::limit_analysis::{self, nonfinite, AffineDecisionRule, LimitAnalysisProblem, OracleStats};
use crate::reformulate::{self, Method};
use crate::solver::{SolveStatus, SolverSettings};
use crate::uncertainty::UncertaintySet;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "robust-la", version, about = "Robust limit analysis under strength and loading uncertainty")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nominal load factor.
    Nominal(ProblemArgs),
    /// Static robust counterpart.
    Rc(MethodArgs),
    /// Affinely adjustable robust counterpart.
    Aarc(MethodArgs),
    /// Realization oracles: every vertex, or seeded projected samples.
    Oracle(OracleArgs),
    /// Parameter sweep over a benchmark family (CSV by default).
    Sweep(SweepArgs),
    /// Trace a (robust) strength criterion boundary.
    Criterion(CriterionArgs),
    /// Trace an eroded von Mises domain.
    Erode(ErodeArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// JSON file: {"bending": …}, {"truss": …}, {"problem": …} or a bare problem.
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// homothetic, vertex-exact, bertsimas-sim or roos.
    #[arg(long, default_value = "roos")]
    pub method: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Vertex,
    Sampling,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "vertex")]
    pub kind: OracleKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Bending,
    Truss,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep definition as JSON; overrides the grid flags.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bending")]
    pub family: FamilyArg,
    /// Fiber count for bending.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long)]
    pub zero_average: bool,
    /// Grid as `start:stop:step` or a comma list.
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Comma list of nominal, rc, aarc, vertex, sampling.
    #[arg(long, default_value = "nominal,rc,aarc")]
    pub quantities: String,
    #[arg(long, default_value = "roos")]
    pub method: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    Box,
    Ellipsoid,
    Cross,
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    /// Criterion JSON file.
    #[arg(long, short, conflicts_with_all = ["mohr_coulomb", "von_mises"])]
    pub input: Option<PathBuf>,
    /// `c0=…,phi0=…,dc=…,dphi=…[,ft0=…,dft=…,rho=…]`; angles take `deg`/`rad` suffixes.
    #[arg(long)]
    pub mohr_coulomb: Option<String>,
    /// Plane-stress von Mises with this uniaxial strength.
    #[arg(long, conflicts_with = "mohr_coulomb")]
    pub von_mises: Option<f64>,
    /// Robustify the Mohr–Coulomb parameters over this set.
    #[arg(long, value_enum)]
    pub set: Option<SetArg>,
    #[arg(long, default_value_t = 360)]
    pub directions: usize,
}

#[derive(Debug, Args)]
pub struct ErodeArgs {
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "cross")]
    pub set: SetArg,
    #[arg(long, default_value = "vertex-exact")]
    pub method: String,
    /// Uniaxial strength of the von Mises criterion.
    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 360)]
    pub directions: usize,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Input(String, Option<(usize, usize)>),
    Solver(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } => CliError::Solver(e),
            // values deserialized from a parsed tree carry no position
            Error::Json(j) => {
                let at = (j.line() > 0).then(|| (j.line(), j.column()));
                CliError::Input(j.to_string(), at)
            }
            other => CliError::Input(other.to_string(), None),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(..) => 2,
            CliError::Solver(_) => 1,
        }
    }

    pub fn diagnostic(&self) -> serde_json::Value {
        match self {
            CliError::Input(msg, Some((line, column))) => json!({"error": "input", "message": msg, "line": line, "column": column}),
            CliError::Input(msg, None) => json!({"error": "input", "message": msg}),
            CliError::Solver(Error::Solver { status, context }) => {
                json!({"error": "solver", "status": status, "context": context, "message": self.to_string()})
            }
            CliError::Solver(e) => json!({"error": "solver", "message": e.to_string()}),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m, _) => write!(f, "{m}"),
            CliError::Solver(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into(), None)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(input_err(format!("tolerance must lie in (0, 1), got {}", cli.tol)));
    }
    let settings = SolverSettings::with_tol(cli.tol, cli.max_iter);
    let text = match &cli.command {
        Command::Nominal(a) => {
            let p = load_problem(&a.input, &settings)?;
            let s = limit_analysis::solve_nominal(&p, &settings)?;
            scalar_output(cli, s.lambda, s.status, Some(s.sigma), None)
        }
        Command::Rc(a) => {
            let p = load_problem(&a.problem.input, &settings)?;
            let s = limit_analysis::solve_static_rc(&p, parse_method(&a.method)?, &settings)?;
            scalar_output(cli, s.lambda, s.status, Some(s.sigma), None)
        }
        Command::Aarc(a) => {
            let p = load_problem(&a.problem.input, &settings)?;
            let s = limit_analysis::solve_aarc(&p, parse_method(&a.method)?, &settings)?;
            scalar_output(cli, s.lambda, s.status, None, Some(s.rule))
        }
        Command::Oracle(a) => oracle(cli, a, &settings)?,
        Command::Sweep(a) => sweep(cli, a, &settings)?,
        Command::Criterion(a) => criterion(cli, a)?,
        Command::Erode(a) => {
            let set = set_of(a.set, 2)?;
            let e = benchmarks::eroded_von_mises(a.alpha / a.sigma0, &set, parse_method(&a.method)?)?;
            let mut t = e.trace_boundary(a.directions)?;
            for p in &mut t {
                if let Some(x) = &mut p.point {
                    x.iter_mut().for_each(|v| *v *= a.sigma0);
                }
            }
            trace_output(cli, &t)
        }
    };
    write_output(cli.output.as_deref(), &text)
}

#[derive(Serialize)]
struct ScalarResult {
    #[serde(with = "nonfinite")]
    lambda: f64,
    status: SolveStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<AffineDecisionRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<Vec<f64>>,
}

fn scalar_output(cli: &Cli, lambda: f64, status: SolveStatus, sigma: Option<Vec<f64>>, rule: Option<AffineDecisionRule>) -> String {
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => format!("lambda,status\n{lambda},{}\n", status_name(status)),
        Format::Json => pretty(&ScalarResult { lambda, status, rule, sigma }),
    }
}

fn status_name(s: SolveStatus) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("results serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct OracleResult {
    #[serde(with = "nonfinite")]
    lambda: f64,
    status: &'static str,
    stats: OracleStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin_vertex: Option<Vec<f64>>,
    realizations: Vec<Vec<f64>>,
    #[serde(with = "nonfinite::vec")]
    lambdas: Vec<f64>,
}

fn oracle(cli: &Cli, a: &OracleArgs, settings: &SolverSettings) -> CliResult<String> {
    let p = load_problem(&a.problem.input, settings)?;
    let r = match a.kind {
        OracleKind::Vertex => {
            let v = limit_analysis::worst_case_vertex_oracle(&p, settings)?;
            let zs = p.set.as_ref().expect("validated").vertices()?;
            OracleResult {
                lambda: v.lambda_min,
                status: if v.stats.infeasible > 0 { "infeasible_realizations" } else { "optimal" },
                stats: v.stats,
                argmin: Some(v.argmin),
                argmin_vertex: Some(v.argmin_vertex),
                realizations: zs,
                lambdas: v.lambdas,
            }
        }
        OracleKind::Sampling => {
            let s = limit_analysis::worst_case_sampling_oracle(&p, a.seed, a.samples, settings)?;
            OracleResult {
                lambda: s.stats.min,
                status: if s.stats.infeasible > 0 { "infeasible_realizations" } else { "optimal" },
                stats: s.stats,
                argmin: None,
                argmin_vertex: None,
                realizations: s.samples,
                lambdas: s.lambdas,
            }
        }
    };
    Ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&r),
        Format::Csv => {
            let mut s = String::from("index,lambda,zeta\n");
            for (k, (z, l)) in r.realizations.iter().zip(&r.lambdas).enumerate() {
                let zs: Vec<String> = z.iter().map(f64::to_string).collect();
                s.push_str(&format!("{k},{l},{}\n", zs.join(";")));
            }
            s
        }
    })
}

fn sweep(cli: &Cli, a: &SweepArgs, settings: &SolverSettings) -> CliResult<String> {
    let spec: SweepSpec = match &a.input {
        Some(path) => serde_json::from_str(&read(path)?).map_err(Error::from)?,
        None => {
            let quantities = a
                .quantities
                .split(',')
                .map(|q| q.trim().parse::<SweepQuantity>())
                .collect::<Result<Vec<_>, _>>()?;
            let family = match a.family {
                FamilyArg::Bending => {
                    let mut cfg = BendingConfig::new(a.n, 0.0, 0.0);
                    cfg.zero_average = a.zero_average;
                    Family::Bending(cfg)
                }
                FamilyArg::Truss => Family::Truss(TrussConfig::default()),
            };
            SweepSpec {
                family,
                gammas: parse_grid(a.gamma.as_deref())?,
                etas: parse_grid(a.eta.as_deref())?,
                alphas: parse_grid(a.alpha.as_deref())?,
                quantities,
                method: parse_method(&a.method)?,
                seed: a.seed,
                samples: a.samples,
            }
        }
    };
    let rows = benchmarks::sweep(&spec, settings)?;
    Ok(match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => benchmarks::sweep_to_csv(&rows),
        Format::Json => pretty(&rows),
    })
}

fn criterion(cli: &Cli, a: &CriterionArgs) -> CliResult<String> {
    if a.set.is_some() && a.mohr_coulomb.is_none() {
        return Err(input_err("--set applies to --mohr-coulomb only"));
    }
    let g = if let Some(path) = &a.input {
        serde_json::from_str::<StrengthCriterion>(&read(path)?).map_err(Error::from)?
    } else if let Some(s0) = a.von_mises {
        StrengthCriterion::plane_stress_von_mises(s0)?
    } else if let Some(spec) = &a.mohr_coulomb {
        let p = parse_mohr_coulomb(spec)?;
        match a.set {
            Some(set) => reformulate::robust_mohr_coulomb(&p, &set_of(set, 3)?)?,
            None => StrengthCriterion::mohr_coulomb_tension_cutoff(&p)?,
        }
    } else {
        return Err(input_err("criterion needs --input, --von-mises or --mohr-coulomb"));
    };
    Ok(trace_output(cli, &g.trace_boundary(a.directions)?))
}

fn trace_output(cli: &Cli, t: &[TracePoint]) -> String {
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => trace_to_csv(t),
        Format::Json => pretty(&t),
    }
}

fn set_of(s: SetArg, dim: usize) -> CliResult<UncertaintySet> {
    Ok(match s {
        SetArg::Box => UncertaintySet::box_set(dim)?,
        SetArg::Ellipsoid => UncertaintySet::ellipsoid(dim)?,
        SetArg::Cross => UncertaintySet::cross_polytope(dim)?,
    })
}

fn parse_method(s: &str) -> CliResult<Method> {
    Ok(s.parse::<Method>()?)
}

/// Radians from `30deg`, `0.5rad` or a bare number (radians).
pub fn parse_angle(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let (num, deg) = if let Some(v) = s.strip_suffix("deg") {
        (v, true)
    } else if let Some(v) = s.strip_suffix("rad") {
        (v, false)
    } else {
        (s, false)
    };
    let v: f64 = num.trim().parse().map_err(|_| input_err(format!("bad angle {s:?}")))?;
    Ok(if deg { v.to_radians() } else { v })
}

/// `key=value` pairs for Mohr–Coulomb data. The tension cutoff defaults to
/// the hydrostatic apex `c0·cot(phi0)`.
pub fn parse_mohr_coulomb(spec: &str) -> CliResult<MohrCoulombParams> {
    let mut p = MohrCoulombParams::new(0.0, 0.0, f64::NAN);
    let mut seen_ft0 = false;
    for part in spec.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| input_err(format!("expected key=value, got {part:?}")))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| input_err(format!("bad number {v:?} for {k}")));
        match k.trim() {
            "c0" => p.c0 = num(v)?,
            "phi0" => p.phi0 = parse_angle(v)?,
            "dc" => p.dc = num(v)?,
            "dphi" => p.dphi = parse_angle(v)?,
            "ft0" => {
                p.ft0 = num(v)?;
                seen_ft0 = true;
            }
            "dft" => p.dft = num(v)?,
            "rho" => p.rho = num(v)?,
            other => return Err(input_err(format!("unknown Mohr–Coulomb key {other:?}"))),
        }
    }
    if !seen_ft0 {
        p.ft0 = p.c0 / p.phi0.tan();
    }
    p.validate()?;
    Ok(p)
}

/// `start:stop:step` (inclusive), a comma list, or nothing.
pub fn parse_grid(s: Option<&str>) -> CliResult<Vec<f64>> {
    let Some(s) = s else { return Ok(Vec::new()) };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| input_err(format!("bad number {v:?} in grid {s:?}")));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(input_err(format!("grid {s:?} needs start ≤ stop and a positive step")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| a + k as f64 * step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(input_err(format!("grid {s:?} is neither start:stop:step nor a comma list"))),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

/// Reads a problem, building benchmark configurations on the way.
pub fn load_problem(path: &Path, settings: &SolverSettings) -> CliResult<LimitAnalysisProblem> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    let p = if let Some(cfg) = value.get("bending") {
        benchmarks::build_bending(&serde_json::from_value(cfg.clone()).map_err(Error::from)?)?
    } else if let Some(cfg) = value.get("truss") {
        let cfg: TrussConfig = serde_json::from_value(cfg.clone()).map_err(Error::from)?;
        benchmarks::build_truss(&cfg, settings)?
    } else if let Some(p) = value.get("problem") {
        let p: LimitAnalysisProblem = serde_json::from_value(p.clone()).map_err(Error::from)?;
        p.validate()?;
        p
    } else {
        LimitAnalysisProblem::from_json(&text)?
    };
    Ok(p)
}

/// Writes to a temporary file beside `path` and renames it into place.
pub fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| input_err(format!("stdout: {e}")))
        }
        Some(path) => {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let io = |e: std::io::Error| input_err(format!("{}: {e}", path.display()));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}
