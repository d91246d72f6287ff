use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use whindex::cayley::{c2d, d2c};
use whindex::equations::CLUSTER_TOL;
use whindex::indices::Tolerances;
use whindex::oracle::{roots_stable, schur_cohen_stable};
use whindex::realization::{
    validate_stable_dissipative, validate_stable_unitary, Residuals, ValidationReport, VALIDATION_TOL,
};
use whindex::{Error, Flavor, Polynomial};
use whindex_cli::json::canonical;
use whindex_cli::output::emit;
use whindex_cli::problem::{realization_document, realization_value, Problem};
use whindex_cli::report::Report;
use whindex_cli::verify::{self, Pipeline, VerifyConfig, DEFAULT_CASES, DEFAULT_SEED};

const EXIT_VALIDATION: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;
const EXIT_VERIFY: u8 = 5;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "whindex", version, about = "Wiener-Hopf partial indices of unitary-on-the-axis rational matrix functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute all partial indices of a problem file ("-" reads stdin).
    Indices {
        /// Problem file, or - for stdin.
        problem: PathBuf,
        /// Clustering tolerance for eigenvalue 1.
        #[arg(long, default_value_t = CLUSTER_TOL)]
        tol: f64,
        /// Tolerance of the stable dissipative input checks.
        #[arg(long, default_value_t = VALIDATION_TOL)]
        valid_tol: f64,
        /// Aligned table instead of canonical JSON.
        #[arg(long)]
        pretty: bool,
        /// Write here (atomically) instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Move a realization between the half plane and the disk.
    Cayley {
        /// Realization file.
        realization: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        /// Write here (atomically) instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the Schur-Cohen test with root location for a polynomial
    /// given by ascending coefficients (`re` or `re,im`).
    #[command(allow_negative_numbers = true)]
    Stability {
        /// Ascending coefficients, constant term first.
        #[arg(required = true)]
        coefficients: Vec<String>,
        /// Write here (atomically) instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the seeded invariant battery.
    Verify {
        /// Base seed; each family derives its own stream.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random cases per family.
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: usize,
        /// Clustering tolerance for eigenvalue 1.
        #[arg(long, default_value_t = CLUSTER_TOL)]
        tol: f64,
    },
    /// Write a named example problem and, optionally, its expected report.
    Example {
        /// Example name (dss).
        name: String,
        /// Write here (atomically) instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the expected report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    C2d,
    D2c,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Computation(String),
    Io(String),
    Disagreement(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Computation(_) => EXIT_COMPUTATION,
            Failure::Io(_) => EXIT_IO,
            Failure::Disagreement(_) => EXIT_DISAGREEMENT,
            Failure::Verify(_) => EXIT_VERIFY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m)
            | Failure::Computation(m)
            | Failure::Io(m)
            | Failure::Disagreement(m)
            | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_)
            | Error::FlavorMismatch { .. }
            | Error::InvalidSpec(_)
            | Error::InvalidArgument(_)
            | Error::InvalidRealization { .. }
            | Error::InconsistentProfile { .. }
            | Error::NotUnitary { .. }
            | Error::Precondition(_) => Failure::Validation(e.to_string()),
            _ => Failure::Computation(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let result = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    };
    result.map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    emit(path, text).map_err(|e| Failure::Io(format!("cannot write output: {e}")))
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

fn indices_report(problem: &Problem, tol: Tolerances) -> Result<Report, Failure> {
    let pair = problem.symbol_pair()?;
    let profile = whindex::full_profile(&pair, tol)?;
    Ok(Report::new(&profile, tol))
}

fn cmd_indices(problem: &Path, tol: Tolerances, pretty: bool, output: Option<&Path>) -> Result<(), Failure> {
    let text = read_input(problem)?;
    let problem = Problem::parse_str(&text).map_err(|e| Failure::Validation(e.to_string()))?;
    let report = indices_report(&problem, tol)?;
    let body = if pretty { report.to_table() } else { with_newline(report.to_canonical()) };
    write_output(output, &body)
}

fn validation_value(kind: &str, v: &ValidationReport) -> Value {
    let residuals = match v.residuals {
        Residuals::Dissipative { dissipative, feedthrough_unitarity, coupling } => json!({
            "dissipative": dissipative, "feedthrough_unitarity": feedthrough_unitarity, "coupling": coupling,
        }),
        Residuals::Unitary { system_unitarity } => json!({"system_unitarity": system_unitarity}),
    };
    json!({
        "kind": kind,
        "stable": v.stable,
        "spectral_bound": v.spectral_bound.is_finite().then_some(v.spectral_bound),
        "near_marginal": v.near_marginal,
        "residuals": residuals,
        "tolerance": v.tolerance,
        "verdict": v.verdict,
    })
}

fn cmd_cayley(input: &Path, direction: Direction, output: Option<&Path>) -> Result<(), Failure> {
    let text = read_input(input)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!(": malformed JSON: {e}")))?;
    let r = realization_document(&value).map_err(|e| Failure::Validation(e.to_string()))?;
    let expected = match direction {
        Direction::C2d => Flavor::Continuous,
        Direction::D2c => Flavor::Discrete,
    };
    if r.flavor() != expected {
        return Err(Failure::Validation(format!(
            "/flavor: {:?} realization cannot go in this direction (expected {expected:?})",
            r.flavor()
        )));
    }
    let (converted, kind, report) = match direction {
        Direction::C2d => {
            let d = c2d(&r)?;
            let report = validate_stable_unitary(&d)?;
            (d, "stable_unitary", report)
        }
        Direction::D2c => {
            let c = d2c(&r)?;
            let report = validate_stable_dissipative(&c)?;
            (c, "stable_dissipative", report)
        }
    };
    let doc = json!({"realization": realization_value(&converted), "validation": validation_value(kind, &report)});
    write_output(output, &with_newline(canonical(&doc)))
}

fn parse_coefficient(text: &str, index: usize) -> Result<Complex64, Failure> {
    let bad = || Failure::Validation(format!("coefficient {index}: cannot parse {text:?}"));
    let number = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    match text.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(number(re).ok_or_else(bad)?, number(im).ok_or_else(bad)?)),
        None => Ok(Complex64::new(number(text).ok_or_else(bad)?, 0.0)),
    }
}

fn cmd_stability(coefficients: &[String], output: Option<&Path>) -> Result<(), Failure> {
    let coeffs = coefficients
        .iter()
        .flat_map(|c| c.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .enumerate()
        .map(|(k, c)| parse_coefficient(&c, k))
        .collect::<Result<Vec<_>, _>>()?;
    let p = Polynomial::new(coeffs)?;
    let by_roots = roots_stable(&p)?;
    let sc = schur_cohen_stable(&p)?;
    let doc = json!({
        "schur_cohen": sc.stable,
        "roots": by_roots,
        "lambda_min": sc.lambda_min,
        "g_norm": sc.g_norm,
        "defect_min": sc.defect_min,
        "agree": by_roots == sc.stable,
    });
    write_output(output, &with_newline(canonical(&doc)))?;
    if by_roots != sc.stable {
        return Err(Failure::Disagreement(format!(
            "DISAGREEMENT: Schur-Cohen says {}, root location says {by_roots}",
            sc.stable
        )));
    }
    Ok(())
}

fn cmd_verify(config: VerifyConfig) -> Result<(), Failure> {
    let summary = verify::run(&config, Pipeline::default());
    write_output(None, &summary.render())?;
    match summary.failing_case() {
        None => Ok(()),
        Some(case) => Err(Failure::Verify(format!("failing case (replay): {}", canonical(&case)))),
    }
}

fn example_problem(name: &str) -> Result<Problem, Failure> {
    match name {
        "dss" => Ok(Problem::DiagonalPowers(vec![-4, -2, 0, 3, 5])),
        _ => Err(Failure::Validation(format!("unknown example {name:?} (known: dss)"))),
    }
}

fn cmd_example(name: &str, output: Option<&Path>, report: Option<&Path>) -> Result<(), Failure> {
    let problem = example_problem(name)?;
    let expected = match report {
        Some(_) => Some(indices_report(&problem, Tolerances::default())?),
        None => None,
    };
    write_output(output, &with_newline(canonical(&problem.to_value())))?;
    if let (Some(path), Some(r)) = (report, expected) {
        write_output(Some(path), &with_newline(r.to_canonical()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Indices { problem, tol, valid_tol, pretty, output } => {
            if !(tol > 0.0 && valid_tol > 0.0) {
                Err(Failure::Validation("tolerances must be positive".into()))
            } else {
                cmd_indices(&problem, Tolerances { cluster: tol, validation: valid_tol }, pretty, output.as_deref())
            }
        }
        Command::Cayley { realization, direction, output } => cmd_cayley(&realization, direction, output.as_deref()),
        Command::Stability { coefficients, output } => cmd_stability(&coefficients, output.as_deref()),
        Command::Verify { seed, cases, tol } => {
            if tol > 0.0 {
                cmd_verify(VerifyConfig { seed, cases, tol: Tolerances { cluster: tol, ..Tolerances::default() } })
            } else {
                Err(Failure::Validation("tolerance must be positive".into()))
            }
        }
        Command::Example { name, output, report } => cmd_example(&name, output.as_deref(), report.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
