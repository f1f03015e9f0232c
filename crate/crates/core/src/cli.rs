//! Command-line front end: `signature`, `integrate` and `solve`.
//!
//! Each command has an in-memory entry point (`cmd_*`) returning its
//! outputs as strings, and [`run`] wires them to files and exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcs::{FieldMap, LipFunction, SmoothMap};
use crate::integrate::{compose_integrand, rough_integral_checked, rough_integral_with, DominatedPath, Summation};
use crate::oneform::lift_polynomial_one_form;
use crate::path::{pure_area_path, read_path_csv, signature, write_path_csv, Control, SampledRoughPath};
use crate::rde::{solve_unchecked, RdeProblem, SolveOptions};
use crate::report::{fmt_f64, to_json, SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_CONVERGENCE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "roughkit", version, about = "Signatures, rough integrals and rough differential equations")]
pub struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on it unless a
    /// flagged nondeterministic reduction is requested.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Exit with code 3 when a certificate check fails.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncated signature of a sampled path.
    Signature(SignatureArgs),
    /// Rough integral of a one-form `f(x) dx` along the lifted path.
    Integrate(IntegrateArgs),
    /// Solve `dy = f(y) dx` by Picard iteration.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct SignatureArgs {
    /// Path CSV with header `t,x1,..,xd`.
    pub path: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub level: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    pub path: PathBuf,
    /// Field JSON mapping `R^d` to `L(R^d, R^w)`.
    #[arg(long)]
    pub form: PathBuf,
    #[arg(long, default_value_t = 2.5)]
    pub p: f64,
    #[arg(long, default_value_t = 3.5)]
    pub gamma: f64,
    /// Truncation level of the lift (defaults to the integer part of p).
    #[arg(long)]
    pub level: Option<usize>,
    /// Sum the grid in parallel; not bit-reproducible across thread counts.
    #[arg(long)]
    pub parallel_sum: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Driver CSV; omit when using `--pure-area`.
    pub path: Option<PathBuf>,
    /// Use the pure-area driver with total area `a` instead of a CSV path.
    #[arg(long, allow_hyphen_values = true)]
    pub pure_area: Option<f64>,
    /// Grid steps of the pure-area driver.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Field JSON mapping `R^m` to `L(R^d, R^m)`.
    #[arg(long)]
    pub field: PathBuf,
    /// Initial value, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub xi: Vec<f64>,
    #[arg(long, default_value_t = 2.5)]
    pub p: f64,
    #[arg(long, default_value_t = 3.5)]
    pub gamma: f64,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// JSON report destination (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Solution CSV destination.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Decay curve CSV (`n,delta,bound`) destination.
    #[arg(long)]
    pub decay: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        Error::NotDominated(_) => EXIT_CERTIFICATE,
        _ => EXIT_INPUT,
    }
}

#[derive(Serialize)]
struct DecayRow {
    k: usize,
    norm: f64,
    /// `|pi_k| k! / length^k`; at most one for bounded-variation paths.
    scaled: f64,
}

#[derive(Serialize)]
struct SignatureReport {
    schema: &'static str,
    command: &'static str,
    dim: usize,
    level: usize,
    samples: usize,
    length: f64,
    levels: Vec<Vec<f64>>,
    decay: Vec<DecayRow>,
}

pub fn cmd_signature<R: Read>(csv: R, level: usize) -> Result<String> {
    let path = read_path_csv(csv)?;
    let sig = signature(&path, level);
    let length = path.length();
    let mut fact = 1.0;
    let decay = (1..=level)
        .map(|k| {
            fact *= k as f64;
            let norm = crate::tensor::level_norm(sig.level_slice(k));
            let scaled = if length > 0.0 {
                norm * fact / length.powi(k as i32)
            } else {
                0.0
            };
            DecayRow { k, norm, scaled }
        })
        .collect();
    to_json(&SignatureReport {
        schema: SCHEMA,
        command: "signature",
        dim: path.dim(),
        level,
        samples: path.len(),
        length,
        levels: (0..=level).map(|k| sig.level_slice(k).to_vec()).collect(),
        decay,
    })
}

#[derive(Serialize)]
struct IntegrateReport {
    schema: &'static str,
    command: &'static str,
    p: f64,
    gamma: f64,
    level: usize,
    samples: usize,
    out_dim: usize,
    endpoint: Vec<f64>,
    discrepancy: f64,
    operator_norm: Option<f64>,
    uncertified: bool,
    /// Sum of the closed lift of a polynomial form; `null` for other forms.
    closed_lift_endpoint: Option<Vec<f64>>,
    summation: &'static str,
}

/// Output of `integrate`: the JSON report and whether it is certified.
pub struct IntegrateOutput {
    pub json: String,
    pub uncertified: bool,
}

pub fn cmd_integrate<R: Read>(
    csv: R,
    form_json: &str,
    p: f64,
    gamma: f64,
    level: Option<usize>,
    summation: Summation,
) -> Result<IntegrateOutput> {
    let path = read_path_csv(csv)?;
    let d = path.dim();
    let f = LipFunction::from_json(form_json, gamma)?;
    if f.in_dim() != d || f.out_dim() % d != 0 {
        return Err(Error::param(format!(
            "form must map R^{d} into L(R^{d}, R^w); got in_dim {} and out_dim {}",
            f.in_dim(),
            f.out_dim()
        )));
    }
    let g = std::sync::Arc::new(SampledRoughPath::lift(&path, p, level)?);
    let omega = Control::from_pvar(&g);
    let x = DominatedPath::driver(g.clone(), path.value(0))?;
    let beta = compose_integrand(&f, &x)?;
    let mut res = rough_integral_checked(&beta, gamma, &omega)?;
    if summation == Summation::Parallel {
        let par = rough_integral_with(&beta, Summation::Parallel);
        res.values = par.values;
    }
    let closed = match f.map() {
        FieldMap::Poly(poly) => {
            let lift = lift_polynomial_one_form(poly.clone(), g.level(), path.value(0).to_vec())?;
            Some(lift.integrate_along(&g)?)
        }
        _ => None,
    };
    let report = IntegrateReport {
        schema: SCHEMA,
        command: "integrate",
        p,
        gamma,
        level: g.level(),
        samples: g.len(),
        out_dim: f.out_dim() / d,
        endpoint: res.endpoint().to_vec(),
        discrepancy: res.discrepancy,
        operator_norm: res.operator_norm,
        uncertified: res.uncertified,
        closed_lift_endpoint: closed,
        summation: match summation {
            Summation::Sequential => "sequential",
            Summation::Parallel => "parallel",
        },
    };
    Ok(IntegrateOutput {
        json: to_json(&report)?,
        uncertified: res.uncertified,
    })
}

/// Where the driver of a solve comes from.
pub enum Driver<R: Read> {
    Csv(R),
    PureArea { area: f64, steps: usize },
}

#[derive(Serialize)]
struct CertificateJson {
    #[serde(rename = "M")]
    m: f64,
    theta: f64,
    control_scale: f64,
}

#[derive(Serialize)]
struct SolveReport {
    schema: &'static str,
    command: &'static str,
    p: f64,
    gamma: f64,
    level: usize,
    samples: usize,
    converged: bool,
    certified: bool,
    iterations: usize,
    delta_norms: Vec<f64>,
    ratios: Vec<f64>,
    #[serde(rename = "fitted_C")]
    fitted_c: f64,
    tail_bound: f64,
    rescale_c: f64,
    fixed_point_residual: f64,
    endpoint: Vec<f64>,
    certificate: CertificateJson,
    warnings: Vec<String>,
}

/// Outputs of `solve`: report JSON, solution CSV, decay CSV and exit code.
pub struct SolveOutput {
    pub report: String,
    pub solution_csv: String,
    pub decay_csv: String,
    pub converged: bool,
    pub certified: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_solve<R: Read>(
    driver: Driver<R>,
    field_json: &str,
    xi: Vec<f64>,
    p: f64,
    gamma: f64,
    level: Option<usize>,
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutput> {
    let g = match driver {
        Driver::Csv(r) => SampledRoughPath::lift(&read_path_csv(r)?, p, level)?,
        Driver::PureArea { area, steps } => {
            if level.is_some_and(|l| l != 2) {
                return Err(Error::param("the pure-area driver is a level-two path"));
            }
            pure_area_path(area, steps, p)?
        }
    };
    let field = LipFunction::from_json(field_json, gamma)?;
    let problem = RdeProblem::new(field, g, xi)?;
    let opts = SolveOptions {
        tol,
        max_iter,
        ..SolveOptions::default()
    };
    let sol = solve_unchecked(&problem, &opts, None)?;
    let r = &sol.report;
    let certified =
        sol.converged && gamma > p && sol.fixed_point_residual <= 10.0 * tol.max(1e-12) && r.fitted_c.is_finite();
    let report = SolveReport {
        schema: SCHEMA,
        command: "solve",
        p,
        gamma,
        level: problem.driver().level(),
        samples: problem.driver().len(),
        converged: sol.converged,
        certified,
        iterations: sol.iterations,
        delta_norms: r.deltas.clone(),
        ratios: r.ratios.clone(),
        fitted_c: r.fitted_c,
        tail_bound: r.tail_bound,
        rescale_c: r.rescale_c,
        fixed_point_residual: sol.fixed_point_residual,
        endpoint: sol.endpoint().to_vec(),
        certificate: CertificateJson {
            m: sol.certificate.m,
            theta: sol.certificate.theta,
            control_scale: sol.certificate.control_scale,
        },
        warnings: sol.warnings.clone(),
    };
    let mut solution_csv = Vec::new();
    write_path_csv(&mut solution_csv, problem.driver().times(), sol.values(), "y")?;
    let mut decay_csv = String::from("n,delta,bound\n");
    for (n, (dl, b)) in r.deltas.iter().zip(&r.bounds).enumerate() {
        let b = b.map(fmt_f64).unwrap_or_default();
        decay_csv.push_str(&format!("{n},{},{b}\n", fmt_f64(*dl)));
    }
    Ok(SolveOutput {
        report: to_json(&report)?,
        solution_csv: String::from_utf8(solution_csv).expect("ASCII output"),
        decay_csv,
        converged: sol.converged,
        certified,
    })
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(dest: &Option<PathBuf>, text: &str) -> Result<()> {
    match dest {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Signature(a) => {
            let json = cmd_signature(open(&a.path)?, a.level)?;
            emit(&a.out, &json)?;
            Ok(EXIT_OK)
        }
        Command::Integrate(a) => {
            let form = read_text(&a.form)?;
            let summation = if a.parallel_sum {
                Summation::Parallel
            } else {
                Summation::Sequential
            };
            let out = cmd_integrate(open(&a.path)?, &form, a.p, a.gamma, a.level, summation)?;
            emit(&a.out, &out.json)?;
            Ok(if cli.strict && out.uncertified {
                EXIT_CERTIFICATE
            } else {
                EXIT_OK
            })
        }
        Command::Solve(a) => {
            let field = read_text(&a.field)?;
            let out = match (&a.path, a.pure_area) {
                (Some(_), Some(_)) => return Err(Error::param("give either a driver CSV or --pure-area, not both")),
                (None, None) => return Err(Error::param("a driver CSV or --pure-area is required")),
                (Some(p), None) => cmd_solve(
                    Driver::Csv(open(p)?),
                    &field,
                    a.xi.clone(),
                    a.p,
                    a.gamma,
                    a.level,
                    a.tol,
                    a.max_iter,
                )?,
                (None, Some(area)) => cmd_solve(
                    Driver::<fs::File>::PureArea {
                        area,
                        steps: a.samples,
                    },
                    &field,
                    a.xi.clone(),
                    a.p,
                    a.gamma,
                    a.level,
                    a.tol,
                    a.max_iter,
                )?,
            };
            emit(&a.report, &out.report)?;
            if let Some(p) = &a.solution {
                fs::write(p, &out.solution_csv)?;
            }
            if let Some(p) = &a.decay {
                fs::write(p, &out.decay_csv)?;
            }
            Ok(if !out.converged {
                EXIT_NO_CONVERGENCE
            } else if cli.strict && !out.certified {
                EXIT_CERTIFICATE
            } else {
                EXIT_OK
            })
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if cli.threads > 0 {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
