use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlcs_core::experiment::{emit_reports, run_experiment, ExperimentConfig};
use nlcs_core::linearize::{classify, linearize, Composition, FreeEntry, LinearizationType};
use nlcs_core::maps::{MapKind, NonlinearMap};
use nlcs_core::matrix::{read_matrix_csv, read_vector_csv, DenseMatrix, DenseVector, Seed};
use nlcs_core::properties::{nsp_estimate, rip_constants, spark};
use nlcs_core::recovery::{recover_via_linearization, Method, PipelineOptions, SolverStatus};
use nlcs_core::Error;
use serde_json::{json, Value};

/// Nonlinear compressed sensing through pointwise linearization.
#[derive(Parser)]
#[command(name = "nlcs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest number of linearly dependent columns.
    Spark { matrix: PathBuf },
    /// Restricted isometry bounds of order k.
    Rip {
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Sampled lower bound on the null space constant of order k.
    Nsp {
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Strongest linearization type a map supports on sampled points.
    Classify {
        #[arg(long)]
        map: String,
        #[arg(long)]
        composition: Composition,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Certificate Y with Y z = F(z) at a given point.
    Linearize {
        #[arg(long)]
        map: String,
        #[arg(long)]
        point: PathBuf,
        /// 1 general, 2 invertible, 3 diagonal, 4 permuted diagonal.
        #[arg(long = "type", value_parser = parse_type)]
        ty: LinearizationType,
    },
    /// Measures a known signal through the map and recovers it.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        composition: Composition,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, default_value = "l1")]
        method: Method,
    },
    /// Batch trials from a JSON config; writes reports to its output_dir.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Quick end-to-end sanity run.
    Selftest,
}

fn parse_type(s: &str) -> Result<LinearizationType, String> {
    let n: u8 = s.parse().map_err(|e| format!("{e}"))?;
    LinearizationType::try_from(n).map_err(|e| e.to_string())
}

/// Failure with its exit code: 1 for bad input, 2 when a solver or a
/// sparse-recovery property fails.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_solver_failure() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn solver_failure(message: String) -> Failure {
    Failure { code: 2, message }
}

fn matrix(path: &PathBuf) -> Result<DenseMatrix, Error> {
    read_matrix_csv(path).map_err(|e| match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn vector(path: &PathBuf) -> Result<DenseVector, Error> {
    read_vector_csv(path).map_err(|e| match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn run(command: Command) -> Result<Value, Failure> {
    match command {
        Command::Spark { matrix: path } => {
            let r = spark(&matrix(&path)?)?;
            Ok(json!(r))
        }
        Command::Rip { matrix: path, k } => Ok(json!(rip_constants(&matrix(&path)?, k)?)),
        Command::Nsp {
            matrix: path,
            k,
            samples,
            seed,
        } => Ok(json!(nsp_estimate(&matrix(&path)?, k, samples, Seed(seed))?)),
        Command::Classify {
            map,
            composition,
            dim,
            samples,
            seed,
        } => {
            let map = NonlinearMap::new(dim, MapKind::parse(&map)?)?;
            Ok(json!(classify(&map, composition, samples, Seed(seed))?))
        }
        Command::Linearize { map, point, ty } => {
            let z = vector(&point)?;
            let map = NonlinearMap::new(z.dim(), MapKind::parse(&map)?)?;
            let cert = linearize(&map, ty, &z, FreeEntry::Unit)?;
            Ok(json!({
                "certificate": cert,
                "residual": cert.residual()?,
            }))
        }
        Command::Recover {
            matrix: path,
            map,
            composition,
            signal,
            method,
        } => {
            let a = matrix(&path)?;
            let x = vector(&signal)?;
            let dim = match composition {
                Composition::Pre => a.rows(),
                Composition::Post => a.cols(),
            };
            let map = NonlinearMap::new(dim, MapKind::parse(&map)?)?;
            let out = recover_via_linearization(&a, &map, composition, &x, &PipelineOptions::with_method(method))?;
            let value = json!({
                "report": out.report,
                "certificate_type": out.certificate.linearization_type(),
                "rip": out.rip,
                "lambda": out.lambda,
                "measurements": out.measurements,
            });
            if out.report.solver_status != SolverStatus::Converged {
                return Err(solver_failure(format!(
                    "solver status {}: {value}",
                    out.report.solver_status
                )));
            }
            Ok(value)
        }
        Command::Experiment { config } => {
            let config = ExperimentConfig::read(&config)?;
            let result = run_experiment(&config)?;
            if let Some(dir) = &config.output_dir {
                emit_reports(&result, dir)?;
            }
            Ok(json!({
                "summary": result.summary,
                "output_dir": config.output_dir,
            }))
        }
        Command::Selftest => selftest(),
    }
}

/// Small checks covering every stage; exit code 2 if any fails.
fn selftest() -> Result<Value, Failure> {
    let mut checks = Vec::new();
    let mut record = |name: &str, passed: bool| checks.push(json!({ "name": name, "passed": passed }));

    let a = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])?;
    record("spark of [[1,0,1],[0,1,1]] is 3", spark(&a)?.spark == 3);

    let z = DenseVector::new(vec![-2.0, 0.0, 3.0])?;
    let sign = NonlinearMap::new(3, MapKind::Sign)?;
    let cert = linearize(&sign, LinearizationType::Diagonal, &z, FreeEntry::Unit)?;
    record("sign certificate reproduces F(z)", cert.residual()? <= 1e-12);

    for (name, map, composition) in [
        ("identity", "identity", Composition::Pre),
        ("abs", "abs", Composition::Pre),
        ("square", "square", Composition::Post),
    ] {
        let config = ExperimentConfig {
            m: 24,
            n: 48,
            k: 3,
            map: MapKind::parse(map)?,
            composition,
            trials: 10,
            seed: Seed(1),
            method: Method::L1,
            output_dir: None,
        };
        let rate = run_experiment(&config)?.summary.success_rate;
        record(&format!("{name} experiment recovers all trials"), rate == 1.0);
    }

    let passed = checks.iter().all(|c| c["passed"] == true);
    let value = json!({ "passed": passed, "checks": checks });
    if passed {
        Ok(value)
    } else {
        Err(solver_failure(value.to_string()))
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; here 2 means solver failure.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(value) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let text = serde_json::to_string_pretty(&value).expect("json values serialize");
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
