//! Command-line front end: `points`, `envelope`, `polymin`, `solve`,
//! `certify`.
//!
//! Exit codes: 0 optimal (or success), 1 I/O failure, 2 usage or schema
//! error, 3 infeasible or ill-posed, 4 numerical failure or iteration limit,
//! 5 certificate verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cone::{InterpWsosCone, Weight};
use crate::error::{Error, Result};
use crate::interpolation::{
    approx_fekete_points, cheb1_points, cheb2_points, padua_points, scale_to_box, BoxDomain, PointSet,
};
use crate::problems::{
    build_envelope, build_polymin, builtin_poly, default_polymin_degree, random_envelope_inputs, PolySpec,
    PolySpecFile, ProblemFile,
};
use crate::recovery::{recover_gram_with_delta, sos_terms, verify_certificate, SosDecomposition, VerificationReport};
use crate::solver::{solve, ConicProblem, SolveResult, SolverParams, Status, TraceRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

/// Environment variable overriding the default `--tol-gap`/`--tol-infeas`.
pub const TOL_ENV: &str = "SOLVER_TOL";

#[derive(Debug, Parser)]
#[command(name = "wsos", version, about = "Interior-point solver for weighted SOS cones in an interpolant basis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an interpolation point set.
    Points(PointsArgs),
    /// Solve a polynomial lower-envelope problem.
    Envelope(EnvelopeArgs),
    /// Lower-bound a polynomial on its box and certify the bound.
    Polymin(PolyminArgs),
    /// Solve a problem file.
    Solve(SolveArgs),
    /// Recover and verify Gram certificates for a solved problem file.
    Certify(CertifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Cheb1,
    Cheb2,
    Padua,
    Fekete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (written atomically); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub tol_gap: Option<f64>,
    #[arg(long)]
    pub tol_infeas: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// CSV file for the per-iteration trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Dimension; 2 for Padua points and 1 otherwise when absent.
    #[arg(long)]
    pub n: Option<usize>,
    /// Interpolation degree.
    #[arg(long, alias = "deg")]
    pub d: usize,
    /// Box as `l1:u1,l2:u2,...`; `[-1, 1]ⁿ` when absent.
    #[arg(long = "box")]
    pub domain: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Half degree: the envelope has degree `2d`.
    #[arg(long)]
    pub d: usize,
    /// Number of random polynomials (ignored with `--poly`).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Degree of the random polynomials.
    #[arg(long, default_value_t = 5)]
    pub poly_degree: usize,
    /// Polynomial files to envelope instead of random ones (repeatable).
    #[arg(long)]
    pub poly: Vec<PathBuf>,
    /// Also write the built problem in problem-file form.
    #[arg(long)]
    pub write_problem: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["builtin", "file"])))]
pub struct PolyminArgs {
    /// One of butcher, caprasse, magnetism.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Polynomial file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Relaxation half degree; `⌈deg f / 2⌉` when absent.
    #[arg(long)]
    pub d: Option<usize>,
    /// First margin below the computed bound to certify; grown tenfold (at
    /// most `--margin-steps` times) until the certificate verifies.
    #[arg(long, default_value_t = 1e-9)]
    pub margin: f64,
    #[arg(long, default_value_t = 4)]
    pub margin_steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub verify_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file.
    pub problem: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Problem file.
    #[arg(long)]
    pub problem: PathBuf,
    /// Solution written by `solve` or `envelope`.
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub verify_tol: f64,
    /// Certify the iterate's `s` or the exact slack `c − Aᵀy`.
    #[arg(long, value_enum, default_value_t = SlackKind::Iterate)]
    pub slack: SlackKind,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// On-disk point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsFile {
    pub family: String,
    pub n: usize,
    pub degree: usize,
    #[serde(rename = "box")]
    pub domain: BoxDomain,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawIterate {
    pub x: Vec<f64>,
    pub tau: f64,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub kappa: f64,
}

/// On-disk solver result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: Status,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
    pub mu: f64,
    pub tau: f64,
    pub kappa: f64,
    /// `x/τ`, `y/τ`, `s/τ`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// Unscaled final iterate; infeasibility certificates live here.
    pub iterate: RawIterate,
    pub message: Option<String>,
}

impl SolutionFile {
    pub fn from_result(r: &SolveResult) -> Self {
        let v = |d: &DVector<f64>| d.iter().copied().collect::<Vec<f64>>();
        Self {
            status: r.status,
            iterations: r.iterations,
            primal_objective: r.primal_objective,
            dual_objective: r.dual_objective,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            relative_gap: r.relative_gap,
            mu: r.mu,
            tau: r.tau,
            kappa: r.kappa,
            x: v(&r.x),
            y: v(&r.y),
            s: v(&r.s),
            iterate: RawIterate {
                x: v(&r.iterate.x),
                tau: r.iterate.tau,
                y: v(&r.iterate.y),
                s: v(&r.iterate.s),
                kappa: r.iterate.kappa,
            },
            message: r.message.clone(),
        }
    }

    fn scalar_fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("status", format!("{:?}", self.status)),
            ("iterations", self.iterations.to_string()),
            ("primal_objective", self.primal_objective.to_string()),
            ("dual_objective", self.dual_objective.to_string()),
            ("primal_residual", self.primal_residual.to_string()),
            ("dual_residual", self.dual_residual.to_string()),
            ("relative_gap", self.relative_gap.to_string()),
            ("mu", self.mu.to_string()),
            ("tau", self.tau.to_string()),
            ("kappa", self.kappa.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramBlockFile {
    pub block: usize,
    pub weight: Option<Weight>,
    pub size: usize,
    /// Dense symmetric, row by row.
    pub gram: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCertificate {
    pub factor: usize,
    pub delta: f64,
    /// `‖Σᵢ Λᵢ*(Sᵢ) − s‖_∞` for this cone factor.
    pub adjoint_residual: f64,
    pub blocks: Vec<GramBlockFile>,
    pub sos: Option<SosDecomposition>,
    pub verification: VerificationReport,
}

/// Which cone vector a certificate is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SlackKind {
    /// The solver's `s/τ`.
    Iterate,
    /// `c − Aᵀy`, which certifies `y` itself.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub passed: bool,
    pub slack: SlackKind,
    pub factors: Vec<FactorCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyminFile {
    pub polynomial: Option<String>,
    pub n: usize,
    pub d: usize,
    /// Dual objective: the computed lower bound.
    pub bound: f64,
    /// `min(primal, dual objective) − margin`, the value the certificate is
    /// for.
    pub certified_bound: f64,
    pub margin: f64,
    pub solution: SolutionFile,
    pub certificate: Option<CertificateFile>,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::NotInterior | Error::NotPsd { .. } => EXIT_VERIFICATION,
        _ => EXIT_USAGE,
    }
}

/// Exit code for a solver status.
pub fn status_code(status: Status) -> i32 {
    match status {
        Status::Optimal => EXIT_OK,
        Status::PrimalInfeasible | Status::DualInfeasible | Status::IllPosed => EXIT_INFEASIBLE,
        Status::NumericalFailure | Status::IterationLimit => EXIT_NUMERICAL,
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Points(a) => cmd_points(&a),
        Command::Envelope(a) => cmd_envelope(&a),
        Command::Polymin(a) => cmd_polymin(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Certify(a) => cmd_certify(&a),
    }
}

/// Solver parameters from flags, then `SOLVER_TOL`, then the defaults.
pub fn solver_params(args: &SolverArgs, env_tol: Option<&str>) -> Result<SolverParams> {
    let mut params = SolverParams::default();
    if let Some(raw) = env_tol {
        let tol: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{TOL_ENV}='{raw}' is not a number")))?;
        params.tol_gap = tol;
        params.tol_infeas = tol;
    }
    if let Some(t) = args.tol_gap {
        params.tol_gap = t;
    }
    if let Some(t) = args.tol_infeas {
        params.tol_infeas = t;
    }
    if let Some(m) = args.max_iters {
        params.max_iters = m;
    }
    for (name, t) in [("tol-gap", params.tol_gap), ("tol-infeas", params.tol_infeas)] {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!("--{name} must lie in (0, 1), got {t}")));
        }
    }
    params.validate()?;
    Ok(params)
}

fn params_from_env(args: &SolverArgs) -> Result<SolverParams> {
    let env = std::env::var(TOL_ENV).ok();
    solver_params(args, env.as_deref())
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Document to `--out` (or stdout); the summary goes to stdout when the
/// document went to a file and to stderr otherwise.
fn emit(output: &OutputArgs, document: &[u8], summary: &str) -> Result<()> {
    match &output.out {
        Some(path) => {
            write_atomic(path, document)?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(document)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    if rows.is_empty() {
        w.write_record([
            "iter",
            "mu",
            "alpha_p",
            "nbhd_norm",
            "corrector_steps",
            "predictor_ratio",
            "residual_norm",
            "residual_shrink_error",
            "newton_residual",
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Long-format CSV `field,index,value`: scalars have an empty index.
pub fn solution_csv(sol: &SolutionFile) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "index", "value"]).map_err(csv_error)?;
    for (name, value) in sol.scalar_fields() {
        w.write_record([name, "", value.as_str()]).map_err(csv_error)?;
    }
    for (name, values) in [("x", &sol.x), ("y", &sol.y), ("s", &sol.s)] {
        for (i, v) in values.iter().enumerate() {
            w.write_record([name.to_string(), i.to_string(), v.to_string()])
                .map_err(csv_error)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn solution_document(sol: &SolutionFile, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => to_json(sol),
        Format::Csv => solution_csv(sol),
    }
}

fn write_trace(args: &SolverArgs, result: &SolveResult) -> Result<()> {
    if let Some(path) = &args.trace {
        write_atomic(path, &trace_csv(&result.trace)?)?;
    }
    Ok(())
}

fn summary(result: &SolveResult) -> String {
    format!(
        "status {:?}, iterations {}, primal objective {:.10e}, dual objective {:.10e}",
        result.status, result.iterations, result.primal_objective, result.dual_objective
    )
}

fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Parses `l1:u1,l2:u2,...`.
pub fn parse_box(spec: &str) -> Result<BoxDomain> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for side in spec.split(',') {
        let (l, u) = side
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("box side '{side}' is not of the form lower:upper")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("box bound '{v}' is not a number")))
        };
        lower.push(parse(l)?);
        upper.push(parse(u)?);
    }
    BoxDomain::new(lower, upper)
}

pub fn point_family(family: Family, n: usize, d: usize, domain: &BoxDomain) -> Result<PointSet> {
    if domain.dim() != n {
        return Err(Error::InvalidArgument(format!("box has dimension {}, --n is {n}", domain.dim())));
    }
    let reference = match family {
        Family::Cheb1 | Family::Cheb2 if n != 1 => {
            return Err(Error::InvalidArgument(format!("{family:?} points are univariate; got --n {n}")))
        }
        Family::Padua if n != 2 => {
            return Err(Error::InvalidArgument(format!("Padua points need --n 2; got --n {n}")))
        }
        Family::Cheb1 => cheb1_points(d),
        Family::Cheb2 => cheb2_points(d)?,
        Family::Padua => padua_points(d)?,
        Family::Fekete => return approx_fekete_points(n, d, domain),
    };
    scale_to_box(&reference, domain)
}

fn cmd_points(a: &PointsArgs) -> Result<i32> {
    let n = a.n.unwrap_or(if a.family == Family::Padua { 2 } else { 1 });
    let domain = match &a.domain {
        Some(s) => parse_box(s)?,
        None => BoxDomain::reference(n),
    };
    let pts = point_family(a.family, n, a.d, &domain)?;
    let family = format!("{:?}", a.family).to_lowercase();
    let document = match a.output.format {
        Format::Json => to_json(&PointsFile {
            family,
            n,
            degree: a.d,
            domain,
            points: pts.points().to_vec(),
        })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record((1..=n).map(|j| format!("t{j}"))).map_err(csv_error)?;
            for p in pts.points() {
                w.write_record(p.iter().map(|v| v.to_string())).map_err(csv_error)?;
            }
            w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?
        }
    };
    emit(&a.output, &document, &format!("U = {}", pts.len()))?;
    Ok(EXIT_OK)
}

fn read_poly(path: &Path) -> Result<PolySpec> {
    let text = read_to_string(path)?;
    let file: PolySpecFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    file.into_spec()
}

fn cmd_envelope(a: &EnvelopeArgs) -> Result<i32> {
    let params = params_from_env(&a.solver)?;
    if a.d == 0 {
        return Err(Error::InvalidArgument("--d must be >= 1".into()));
    }
    let domain = BoxDomain::reference(a.n);
    let fs = if a.poly.is_empty() {
        if a.k == 0 {
            return Err(Error::InvalidArgument("--k must be >= 1".into()));
        }
        random_envelope_inputs(a.n, a.poly_degree, a.k, a.seed, &domain)?
    } else {
        a.poly.iter().map(|p| read_poly(p)).collect::<Result<Vec<_>>>()?
    };
    let built = build_envelope(a.n, a.d, &domain, &fs)?;
    if let Some(path) = &a.write_problem {
        write_atomic(path, &to_json(&ProblemFile::from_problem(&built.problem))?)?;
    }
    let result = solve(&built.problem, &params)?;
    write_trace(&a.solver, &result)?;
    let sol = SolutionFile::from_result(&result);
    emit(&a.output, &solution_document(&sol, a.output.format)?, &summary(&result))?;
    Ok(status_code(result.status))
}

fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let params = params_from_env(&a.solver)?;
    let text = read_to_string(&a.problem)?;
    let problem = ProblemFile::parse(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", a.problem.display())))?
        .into_problem()?;
    let result = solve(&problem, &params)?;
    write_trace(&a.solver, &result)?;
    let sol = SolutionFile::from_result(&result);
    emit(&a.output, &solution_document(&sol, a.output.format)?, &summary(&result))?;
    Ok(status_code(result.status))
}

/// Certificate for every cone factor of `problem` for the slack
/// `s = c − Aᵀy` at the dual point `y` and the primal point `x`.
pub fn certify_slack(
    problem: &ConicProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
    delta: f64,
    verify_tol: f64,
) -> Result<CertificateFile> {
    if y.len() != problem.b().len() {
        return Err(Error::Dimension(format!(
            "solution has {} y entries; problem needs {}",
            y.len(),
            problem.b().len()
        )));
    }
    let slack = problem.c() - problem.a().tr_mul(y);
    certify_vector(problem, x, &slack, delta, verify_tol, SlackKind::Exact)
}

/// Certificate for every cone factor of `problem` for the cone vector `s`
/// at the primal point `x`.
pub fn certify_vector(
    problem: &ConicProblem,
    x: &DVector<f64>,
    slack: &DVector<f64>,
    delta: f64,
    verify_tol: f64,
    kind: SlackKind,
) -> Result<CertificateFile> {
    let cone = problem.cone();
    if x.len() != cone.dim() || slack.len() != cone.dim() {
        return Err(Error::Dimension(format!(
            "solution has {} x and {} s entries; problem needs {}",
            x.len(),
            slack.len(),
            cone.dim()
        )));
    }
    let mut factors = Vec::with_capacity(cone.factors().len());
    for (f, factor) in cone.factors().iter().enumerate() {
        let s = cone.slice(&slack, f);
        let cert = recover_gram_with_delta(factor, &cone.slice(x, f), &s, delta)?;
        factors.push(factor_certificate(f, factor, &s, &cert, verify_tol));
    }
    Ok(CertificateFile {
        passed: factors.iter().all(|f| f.verification.passed),
        slack: kind,
        factors,
    })
}

fn factor_certificate(
    f: usize,
    cone: &InterpWsosCone,
    s: &DVector<f64>,
    cert: &crate::recovery::GramCertificate,
    verify_tol: f64,
) -> FactorCertificate {
    let verification = verify_certificate(cone, s, cert, verify_tol);
    FactorCertificate {
        factor: f,
        delta: cert.delta,
        adjoint_residual: cert.adjoint_residual,
        blocks: cert
            .grams
            .iter()
            .zip(cone.blocks())
            .zip(&cert.min_eigenvalues)
            .enumerate()
            .map(|(i, ((g, b), &min_eigenvalue))| GramBlockFile {
                block: i,
                weight: b.weight.clone(),
                size: g.nrows(),
                gram: g.row_iter().map(|r| r.iter().copied().collect()).collect(),
                min_eigenvalue,
            })
            .collect(),
        sos: sos_terms(cert, cone).ok(),
        verification,
    }
}

fn cmd_polymin(a: &PolyminArgs) -> Result<i32> {
    let params = params_from_env(&a.solver)?;
    if !(a.margin >= 0.0 && a.margin.is_finite()) {
        return Err(Error::InvalidArgument("--margin must be a nonnegative number".into()));
    }
    let f = match (&a.builtin, &a.file) {
        (Some(name), _) => builtin_poly(name)?,
        (None, Some(path)) => read_poly(path)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let d = a.d.unwrap_or_else(|| default_polymin_degree(&f));
    let built = build_polymin(&f, d)?;
    let result = solve(&built.problem, &params)?;
    write_trace(&a.solver, &result)?;
    let bound = result.dual_objective;
    // both objectives carry errors of the order of the tolerances; certify
    // below the smaller one and back off until the certificate holds
    let base = result.primal_objective.min(bound);
    let mut margin = a.margin;
    let mut certificate = None;
    if result.status == Status::Optimal {
        let delta = result.mu / (result.tau * result.tau);
        for step in 0..=a.margin_steps {
            let y = DVector::from_element(1, base - margin);
            let cert = certify_slack(&built.problem, &result.x, &y, delta, a.verify_tol)?;
            let passed = cert.passed;
            certificate = Some(cert);
            if passed || step == a.margin_steps {
                break;
            }
            margin *= 10.0;
        }
    }
    let certified_bound = base - margin;
    let doc = PolyminFile {
        polynomial: f.name().map(str::to_string),
        n: f.n(),
        d,
        bound,
        certified_bound,
        margin,
        solution: SolutionFile::from_result(&result),
        certificate,
    };
    let document = match a.output.format {
        Format::Json => to_json(&doc)?,
        Format::Csv => solution_csv(&doc.solution)?,
    };
    let verdict = match &doc.certificate {
        Some(c) if c.passed => "certificate verified",
        Some(_) => "certificate FAILED verification",
        None => "no certificate",
    };
    emit(
        &a.output,
        &document,
        &format!("{}; bound {:.12}; {verdict}", summary(&result), bound),
    )?;
    Ok(match &doc.certificate {
        Some(c) if !c.passed => EXIT_VERIFICATION,
        _ => status_code(result.status),
    })
}

fn cmd_certify(a: &CertifyArgs) -> Result<i32> {
    let problem = ProblemFile::parse(&read_to_string(&a.problem)?)
        .map_err(|e| Error::Schema(format!("{}: {e}", a.problem.display())))?
        .into_problem()?;
    let sol: SolutionFile = serde_json::from_str(&read_to_string(&a.solution)?)
        .map_err(|e| Error::Schema(format!("{}: {e}", a.solution.display())))?;
    let delta = sol.mu / (sol.tau * sol.tau);
    let x = DVector::from_vec(sol.x.clone());
    let y = DVector::from_vec(sol.y.clone());
    let s = DVector::from_vec(sol.s.clone());
    let cert = match a.slack {
        SlackKind::Exact => certify_slack(&problem, &x, &y, delta, a.verify_tol)?,
        SlackKind::Iterate => certify_vector(&problem, &x, &s, delta, a.verify_tol, SlackKind::Iterate)?,
    };
    if y.len() == problem.b().len() && s.len() == problem.c().len() {
        let gap = (problem.c() - problem.a().tr_mul(&y) - &s).amax();
        eprintln!("max |c - A^T y - s| = {gap:.3e}");
    }
    let worst = cert
        .factors
        .iter()
        .map(|f| f.verification.adjoint_residual)
        .fold(0.0_f64, f64::max);
    let summary = format!(
        "{} ({} factors, worst adjoint residual {worst:.3e})",
        if cert.passed { "certificate verified" } else { "certificate FAILED verification" },
        cert.factors.len()
    );
    let document = match a.output.format {
        Format::Json => to_json(&cert)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["factor", "block", "min_eigenvalue", "positive_definite", "adjoint_residual"])
                .map_err(csv_error)?;
            for f in &cert.factors {
                for b in &f.verification.blocks {
                    w.write_record([
                        f.factor.to_string(),
                        b.block.to_string(),
                        b.min_eigenvalue.to_string(),
                        b.positive_definite.to_string(),
                        f.verification.adjoint_residual.to_string(),
                    ])
                    .map_err(csv_error)?;
                }
            }
            w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?
        }
    };
    emit(&a.output, &document, &summary)?;
    Ok(if cert.passed { EXIT_OK } else { EXIT_VERIFICATION })
}
