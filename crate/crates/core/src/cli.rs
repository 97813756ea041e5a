//! Command-line surface: single bounds as JSON, parameter sweeps as CSV, the
//! verification suite as JSON lines, and flow decay checks.
//!
//! Exit codes: 0 success, 2 invalid request or domain, 3 solver failure
//! (`verify` exits 1 when a criterion fails).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::flow::{FlowOperator, FlowState};
use crate::model::{quaternionic_profile, riemannian_profile, GeometryProfile, ModelProblem};
use crate::oracle::{self, DiscreteProblem, Richardson, DEFAULT_MAX_ITERS};
use crate::shoot::{self, DEFAULT_REL_TOL};
use crate::verify::{self, Fault, CRITERIA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "EIGENBOUND_THREADS";
pub const CERTIFICATE_POINTS: usize = 129;
pub const DEFAULT_CELLS: usize = 8192;
const RESIDUAL_NODES: usize = 32;
const SWEEP_HEADER: [&str; 10] = [
    "theorem", "m", "p", "kappa", "lambda", "length", "method", "eigenvalue", "residual", "error",
];

#[derive(Debug, Parser)]
#[command(name = "eigenbound", version, about = "First-eigenvalue lower bounds for the p-Laplacian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one bound and print a JSON report.
    Bound(BoundArgs),
    /// Evaluate a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Run the acceptance suite and print JSON lines.
    Verify(VerifyArgs),
    /// Run the model heat flow from the eigenfunction and fit its decay.
    Flow(FlowArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// Quaternionic profile, first nonzero Neumann eigenvalue (diameter).
    Neumann,
    /// Quaternionic profile, first Dirichlet eigenvalue (inradius, Λ).
    Dirichlet,
    /// Riemannian profile of dimension n with Ricci bound (n-1)κ (diameter).
    Classical,
}

impl Theorem {
    fn name(self) -> &'static str {
        match self {
            Theorem::Neumann => "neumann",
            Theorem::Dirichlet => "dirichlet",
            Theorem::Classical => "classical",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "neumann" => Some(Theorem::Neumann),
            "dirichlet" => Some(Theorem::Dirichlet),
            "classical" => Some(Theorem::Classical),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shoot,
    Oracle,
    Both,
}

impl Method {
    fn runs_shoot(self) -> bool {
        self != Method::Oracle
    }

    fn runs_oracle(self) -> bool {
        self != Method::Shoot
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(value_enum)]
    pub theorem: Theorem,
    /// Quaternionic dimension m (real dimension 4m), or the dimension n for
    /// `classical`.
    #[arg(long, visible_alias = "n")]
    pub m: Option<u32>,
    #[arg(long)]
    pub p: f64,
    /// Curvature lower bound κ.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Boundary convexity Λ (dirichlet only; default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub diameter: Option<f64>,
    #[arg(long)]
    pub inradius: Option<f64>,
    /// Generic drift `a1:k1,a2:k2,...` (multiplicity:curvature), replacing
    /// the named profile.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    #[arg(long, value_enum, default_value = "shoot")]
    pub method: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid such as `theorem=neumann;m=2,3;p=1.5,2;kappa=0;D=1:2:3`.
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value = "shoot")]
    pub method: Method,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Oracle settings.
#[derive(Debug, Clone, Copy, PartialEq, Args)]
pub struct SolverArgs {
    /// Oracle mesh cells (the oracle also runs on twice as many).
    #[arg(long, default_value_t = DEFAULT_CELLS)]
    pub cells: usize,
    /// Oracle iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
}

impl Default for SolverArgs {
    fn default() -> Self {
        SolverArgs {
            cells: DEFAULT_CELLS,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    WeightSign,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only these criteria (repeatable).
    #[arg(long)]
    pub criterion: Vec<u8>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 48)]
    pub cells: usize,
    /// Final time (default: three decay times).
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Validated, echoable form of the problem flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRequest {
    pub theorem: Theorem,
    pub m: Option<u32>,
    pub p: Num,
    pub kappa: Option<Num>,
    pub lambda: Option<Num>,
    pub diameter: Option<Num>,
    pub inradius: Option<Num>,
    pub profile: Option<String>,
}

impl BoundRequest {
    pub fn from_args(a: &ProblemArgs) -> Result<Self> {
        let req = BoundRequest {
            theorem: a.theorem,
            m: a.m,
            p: Num(a.p),
            kappa: a.kappa.map(Num),
            lambda: a.lambda.map(Num),
            diameter: a.diameter.map(Num),
            inradius: a.inradius.map(Num),
            profile: a.profile.clone(),
        };
        req.check()?;
        Ok(req)
    }

    fn check(&self) -> Result<()> {
        let named = self.profile.is_none();
        if named && self.m.is_none() {
            return Err(Error::domain("--m (or --n) is required unless --profile is given"));
        }
        if named && self.kappa.is_none() {
            return Err(Error::domain("--kappa is required unless --profile is given"));
        }
        match self.theorem {
            Theorem::Dirichlet => {
                if self.inradius.is_none() {
                    return Err(Error::domain("dirichlet needs --inradius"));
                }
                if self.diameter.is_some() {
                    return Err(Error::domain("dirichlet takes --inradius, not --diameter"));
                }
            }
            Theorem::Neumann | Theorem::Classical => {
                if self.diameter.is_none() {
                    return Err(Error::domain(format!("{} needs --diameter", self.theorem.name())));
                }
                if self.inradius.is_some() {
                    return Err(Error::domain(format!("{} takes --diameter, not --inradius", self.theorem.name())));
                }
                if self.lambda.is_some() {
                    return Err(Error::domain("--lambda is only meaningful for dirichlet"));
                }
            }
        }
        Ok(())
    }

    fn length(&self) -> f64 {
        self.diameter.or(self.inradius).map_or(f64::NAN, |n| n.0)
    }

    /// The model problem described by the request.
    pub fn problem(&self) -> Result<ModelProblem> {
        let profile = match &self.profile {
            Some(spec) => parse_profile(spec)?,
            None => {
                let (m, kappa) = (self.m.unwrap_or(0), self.kappa.map_or(0.0, |k| k.0));
                match self.theorem {
                    Theorem::Classical => riemannian_profile(m, kappa)?,
                    _ => quaternionic_profile(m, kappa)?,
                }
            }
        };
        match self.theorem {
            Theorem::Dirichlet => {
                let lambda = self.lambda.map_or(0.0, |l| l.0);
                ModelProblem::dirichlet(profile.with_boundary(lambda)?, self.p.0, self.length())
            }
            _ => ModelProblem::neumann(profile, self.p.0, self.length()),
        }
    }
}

/// Parses `a1:k1,a2:k2,...`.
pub fn parse_profile(spec: &str) -> Result<GeometryProfile> {
    let spec = spec.trim();
    let spec = spec.strip_prefix("custom").map_or(spec, str::trim);
    let terms = spec
        .split(',')
        .map(|item| {
            let (a, k) = item
                .split_once(':')
                .ok_or_else(|| Error::domain(format!("profile term {item:?} is not of the form a:k")))?;
            Ok((parse_f64(a)?, parse_f64(k)?))
        })
        .collect::<Result<Vec<_>>>()?;
    GeometryProfile::custom(&terms)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::domain(format!("{s:?} is not a number")))
}

/// A float printed with 17 significant digits; `null` when not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn text(self) -> String {
        format!("{:.16e}", self.0)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

struct Table<'a>(&'a [(f64, f64)]);

impl Serialize for Table<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for &(s, v) in self.0 {
            seq.serialize_element(&[Num(s), Num(v)])?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenvalues {
    pub shoot: Option<Num>,
    pub oracle: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub request: BoundRequest,
    pub method: Method,
    /// Shooting value when it ran, otherwise the extrapolated oracle value.
    pub eigenvalue: Num,
    pub eigenvalues: Eigenvalues,
    pub relative_disagreement: Option<Num>,
    pub closed_form: Option<Num>,
    /// Shooting: normalized equation residual of the certificate. Oracle
    /// only: `|λ(2n) - λ(n)|`.
    pub residual: Num,
    pub iterations: usize,
    pub bracket: Option<[Num; 2]>,
    pub validation: &'static str,
    #[serde(serialize_with = "serialize_table")]
    pub certificate: Vec<(f64, f64)>,
}

fn serialize_table<S: Serializer>(t: &[(f64, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    Table(t).serialize(s)
}

/// Result of one oracle evaluation on `n` and `2n` cells.
struct OracleRun {
    values: Richardson,
    iterations: usize,
    phi: Vec<f64>,
}

fn run_oracle(problem: &ModelProblem, solver: SolverArgs) -> Result<OracleRun> {
    let coarse = oracle::minimize(&DiscreteProblem::from_model(problem, solver.cells)?, solver.max_iters)?;
    let fine = oracle::minimize(&DiscreteProblem::from_model(problem, 2 * solver.cells)?, solver.max_iters)?;
    Ok(OracleRun {
        values: Richardson::new(coarse.eigenvalue, fine.eigenvalue),
        iterations: coarse.iterations + fine.iterations,
        phi: fine.phi,
    })
}

/// Linear interpolation of mesh values at `points` uniform locations.
fn resample(values: &[f64], end: f64, points: usize) -> Vec<(f64, f64)> {
    let n = values.len() - 1;
    (0..points)
        .map(|i| {
            let s = end * i as f64 / (points - 1) as f64;
            let x = s / end * n as f64;
            let j = (x.floor() as usize).min(n - 1);
            let t = x - j as f64;
            (s, values[j] * (1.0 - t) + values[j + 1] * t)
        })
        .collect()
}

/// Solves a single request.
pub fn cmd_bound(request: &BoundRequest, method: Method, rel_tol: f64, solver: SolverArgs) -> Result<BoundReport> {
    let problem = request.problem()?;
    problem.validate()?;
    let shoot = method.runs_shoot().then(|| shoot::solve(&problem, rel_tol)).transpose()?;
    let oracle = method.runs_oracle().then(|| run_oracle(&problem, solver)).transpose()?;

    let shoot_value = shoot.as_ref().map(|r| r.eigenvalue);
    let oracle_value = oracle.as_ref().map(|r| r.values.extrapolated);
    let (eigenvalue, residual, iterations, bracket, certificate) = match (&shoot, &oracle) {
        (Some(r), _) => (
            r.eigenvalue,
            r.divergence_residual(&problem, RESIDUAL_NODES)?,
            r.diagnostics.iterations,
            Some([Num(r.diagnostics.bracket.0), Num(r.diagnostics.bracket.1)]),
            r.certificate.table(CERTIFICATE_POINTS),
        ),
        (None, Some(o)) => (
            o.values.extrapolated,
            o.values.residual(),
            o.iterations,
            None,
            resample(&o.phi, problem.end(), CERTIFICATE_POINTS),
        ),
        (None, None) => unreachable!("every method runs a solver"),
    };
    let relative_disagreement = match (shoot_value, oracle_value) {
        (Some(s), Some(o)) => Some(Num(((o - s) / s).abs())),
        _ => None,
    };
    Ok(BoundReport {
        request: request.clone(),
        method,
        eigenvalue: Num(eigenvalue),
        eigenvalues: Eigenvalues {
            shoot: shoot_value.map(Num),
            oracle: oracle_value.map(Num),
        },
        relative_disagreement,
        closed_form: problem.closed_form().map(Num),
        residual: Num(residual),
        iterations,
        bracket,
        validation: "ok",
        certificate,
    })
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

/// One parameter point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub theorem: Theorem,
    pub m: u32,
    pub p: f64,
    pub kappa: f64,
    pub lambda: Option<f64>,
    pub length: f64,
}

impl GridPoint {
    fn request(&self) -> BoundRequest {
        let (diameter, inradius) = match self.theorem {
            Theorem::Dirichlet => (None, Some(Num(self.length))),
            _ => (Some(Num(self.length)), None),
        };
        BoundRequest {
            theorem: self.theorem,
            m: Some(self.m),
            p: Num(self.p),
            kappa: Some(Num(self.kappa)),
            lambda: self.lambda.map(Num),
            diameter,
            inradius,
            profile: None,
        }
    }
}

fn parse_values(key: &str, text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?,
        [start, stop, count] => {
            let (a, b) = (parse_f64(start)?, parse_f64(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("{key}: count {count:?} is not an integer")))?;
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        _ => return Err(Error::domain(format!("{key}: expected a comma list or start:stop:count"))),
    };
    if values.is_empty() {
        return Err(Error::domain(format!("{key}: no values")));
    }
    Ok(values)
}

/// Expands a grid spec into points in lexicographic order of
/// `theorem, m, p, kappa, lambda, length`.
pub fn parse_grid(spec: &str) -> Result<Vec<GridPoint>> {
    let mut theorems = None;
    let mut ms = None;
    let mut ps = None;
    let mut kappas = None;
    let mut lambdas = None;
    let mut lengths: Option<(Vec<f64>, Option<Theorem>)> = None;
    for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::domain(format!("grid entry {item:?} is not key=values")))?;
        let key = key.trim();
        let slot_taken = || Error::domain(format!("grid key {key:?} given twice"));
        match key {
            "theorem" => {
                let list = value
                    .split(',')
                    .map(|t| Theorem::parse(t.trim()).ok_or_else(|| Error::domain(format!("unknown theorem {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                if theorems.replace(list).is_some() {
                    return Err(slot_taken());
                }
            }
            "m" | "n" => {
                let list = parse_values(key, value)?
                    .into_iter()
                    .map(|x| {
                        if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                            Ok(x as u32)
                        } else {
                            Err(Error::domain(format!("{key} = {x} is not a positive integer")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if ms.replace(list).is_some() {
                    return Err(slot_taken());
                }
            }
            "p" => {
                if ps.replace(parse_values(key, value)?).is_some() {
                    return Err(slot_taken());
                }
            }
            "kappa" => {
                if kappas.replace(parse_values(key, value)?).is_some() {
                    return Err(slot_taken());
                }
            }
            "lambda" => {
                if lambdas.replace(parse_values(key, value)?).is_some() {
                    return Err(slot_taken());
                }
            }
            "D" | "diameter" | "R" | "inradius" | "length" => {
                let implied = match key {
                    "D" | "diameter" => Some(Theorem::Neumann),
                    "R" | "inradius" => Some(Theorem::Dirichlet),
                    _ => None,
                };
                if lengths.replace((parse_values(key, value)?, implied)).is_some() {
                    return Err(slot_taken());
                }
            }
            other => return Err(Error::domain(format!("unknown grid key {other:?}"))),
        }
    }
    let (lengths, implied) = lengths.ok_or_else(|| Error::domain("grid needs D, R or length"))?;
    let theorems = match (theorems, implied) {
        (Some(t), _) => t,
        (None, Some(t)) => vec![t],
        (None, None) => return Err(Error::domain("grid needs theorem=... when using length")),
    };
    let ms = ms.ok_or_else(|| Error::domain("grid needs m (or n)"))?;
    let ps = ps.ok_or_else(|| Error::domain("grid needs p"))?;
    let kappas = kappas.ok_or_else(|| Error::domain("grid needs kappa"))?;

    let mut points = Vec::new();
    for &theorem in &theorems {
        let lambda_list: Vec<Option<f64>> = match (&lambdas, theorem) {
            (Some(l), Theorem::Dirichlet) => l.iter().copied().map(Some).collect(),
            (Some(_), _) => return Err(Error::domain("lambda is only meaningful for dirichlet")),
            (None, _) => vec![None],
        };
        for &m in &ms {
            for &p in &ps {
                for &kappa in &kappas {
                    for &lambda in &lambda_list {
                        for &length in &lengths {
                            points.push(GridPoint {
                                theorem,
                                m,
                                p,
                                kappa,
                                lambda,
                                length,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(points)
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    pub method: Method,
    pub eigenvalue: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<Error>,
}

impl SweepRow {
    fn record(&self) -> [String; 10] {
        let num = |x: Option<f64>| x.map_or(String::new(), |v| Num(v).text());
        let pt = &self.point;
        [
            pt.theorem.name().to_string(),
            pt.m.to_string(),
            pt.p.to_string(),
            pt.kappa.to_string(),
            pt.lambda.map_or(String::new(), |l| l.to_string()),
            pt.length.to_string(),
            match self.method {
                Method::Shoot => "shoot",
                Method::Oracle => "oracle",
                Method::Both => "both",
            }
            .to_string(),
            num(self.eigenvalue),
            num(self.residual),
            self.error.as_ref().map_or(String::new(), ToString::to_string),
        ]
    }
}

fn sweep_point(point: &GridPoint, method: Method, rel_tol: f64, solver: SolverArgs) -> Vec<SweepRow> {
    let methods: &[Method] = match method {
        Method::Both => &[Method::Shoot, Method::Oracle],
        Method::Shoot => &[Method::Shoot],
        Method::Oracle => &[Method::Oracle],
    };
    let request = point.request();
    methods
        .iter()
        .map(|&m| {
            let outcome = request.check().and_then(|()| cmd_bound(&request, m, rel_tol, solver));
            match outcome {
                Ok(r) => SweepRow {
                    point: point.clone(),
                    method: m,
                    eigenvalue: Some(r.eigenvalue.0),
                    residual: Some(r.residual.0),
                    error: None,
                },
                Err(e) => SweepRow {
                    point: point.clone(),
                    method: m,
                    eigenvalue: None,
                    residual: None,
                    error: Some(e),
                },
            }
        })
        .collect()
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Evaluates every grid point (in parallel, capped by
/// `EIGENBOUND_THREADS`) and returns rows in grid order.
pub fn cmd_sweep(grid: &str, method: Method, rel_tol: f64, solver: SolverArgs) -> Result<Vec<SweepRow>> {
    let points = parse_grid(grid)?;
    let work = || -> Vec<SweepRow> {
        points
            .par_iter()
            .map(|pt| sweep_point(pt, method, rel_tol, solver))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    match thread_cap() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()
}

fn sweep_exit(rows: &[SweepRow]) -> i32 {
    let failed: Vec<&Error> = rows.iter().filter_map(|r| r.error.as_ref()).collect();
    if rows.is_empty() || failed.len() < rows.len() {
        EXIT_OK
    } else if failed.iter().all(|e| e.is_validation()) {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub request: BoundRequest,
    pub eigenvalue: Num,
    pub expected_rate: Num,
    pub rate: Num,
    pub relative_error: Num,
    pub min_cosine: Num,
    pub cells: usize,
    pub final_time: Num,
    pub steps: usize,
    #[serde(serialize_with = "serialize_table")]
    pub final_profile: Vec<(f64, f64)>,
}

/// Starts the flow from the shooting certificate and fits its decay.
pub fn cmd_flow(request: &BoundRequest, cells: usize, time: Option<f64>) -> Result<FlowReport> {
    let problem = request.problem()?;
    let r = shoot::solve(&problem, DEFAULT_REL_TOL)?;
    let expected = r.eigenvalue.powf(1.0 / (problem.p - 1.0));
    let t_final = time.unwrap_or(3.0 / expected);
    let op = FlowOperator::new(&problem, cells)?;
    let initial = FlowState::from_fn(&problem, cells, |s| r.certificate.eval(s).0);
    let fit = op.decay_fit(&initial, t_final)?;
    let final_profile = fit.final_state.mesh().into_iter().zip(fit.final_state.values.iter().copied()).collect();
    Ok(FlowReport {
        request: request.clone(),
        eigenvalue: Num(r.eigenvalue),
        expected_rate: Num(expected),
        rate: Num(fit.rate),
        relative_error: Num(((fit.rate - expected) / expected).abs()),
        min_cosine: Num(fit.min_cosine),
        cells,
        final_time: Num(fit.final_state.time),
        steps: fit.steps,
        final_profile,
    })
}

#[derive(Serialize)]
struct VerifySummary {
    summary: bool,
    passed: usize,
    failed: usize,
    pass: bool,
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> i32 {
    let written = open_out(out).and_then(|mut w| {
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()
    });
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Bound(a) => {
            let report = BoundRequest::from_args(&a.problem).and_then(|req| cmd_bound(&req, a.method, a.rel_tol, a.solver));
            match report {
                Ok(r) => emit_json(&r, &a.out),
                Err(e) => fail(&e),
            }
        }
        Command::Flow(a) => {
            let report = BoundRequest::from_args(&a.problem).and_then(|req| cmd_flow(&req, a.cells, a.time));
            match report {
                Ok(r) => emit_json(&r, &a.out),
                Err(e) => fail(&e),
            }
        }
        Command::Sweep(a) => match cmd_sweep(&a.grid, a.method, a.rel_tol, a.solver) {
            Ok(rows) => {
                let written = open_out(&a.out).and_then(|w| write_csv(&rows, w));
                if let Err(e) = written {
                    eprintln!("error: {e}");
                    return EXIT_SOLVER;
                }
                for row in rows.iter().filter(|r| r.error.is_some()) {
                    eprintln!(
                        "warning: {} m={} p={} kappa={} length={}: {}",
                        row.point.theorem.name(),
                        row.point.m,
                        row.point.p,
                        row.point.kappa,
                        row.point.length,
                        row.error.as_ref().map_or(String::new(), ToString::to_string)
                    );
                }
                sweep_exit(&rows)
            }
            Err(e) => fail(&e),
        },
        Command::Verify(a) => {
            let fault = a.inject_fault.map(|FaultArg::WeightSign| Fault::WeightSign);
            let ids: Vec<u8> = if a.criterion.is_empty() {
                CRITERIA.iter().map(|c| c.0).collect()
            } else {
                a.criterion.clone()
            };
            let mut stdout = io::stdout().lock();
            let mut passed = 0;
            for &id in &ids {
                let report = verify::run(id, fault);
                passed += usize::from(report.pass);
                let mut line = serde_json::to_string(&report).expect("report serializes");
                line.push('\n');
                let _ = stdout.write_all(line.as_bytes());
            }
            let summary = VerifySummary {
                summary: true,
                passed,
                failed: ids.len() - passed,
                pass: passed == ids.len(),
            };
            let mut line = String::new();
            let _ = writeln!(line, "{}", serde_json::to_string(&summary).expect("summary serializes"));
            let _ = stdout.write_all(line.as_bytes());
            let _ = stdout.flush();
            if summary.pass {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
    }
}

/// Parses `args` and runs. Argument errors print usage and return 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            }
        }
    }
}
