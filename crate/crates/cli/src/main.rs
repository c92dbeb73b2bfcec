mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use senrec_core::protocols::{DEFAULT_LAMBDA, DEFAULT_SIGMA};
use senrec_core::{
    execute, plan_for, DenseComplexMatrix, DenseOptions, Engine, InstanceSampler, Matrix,
    Operation, PlanOptions, ProtocolInput, RhsPolicy, ScaleMode, ScalePolicy, C64,
    DEFAULT_DENSE_CAP,
};

use report::{RunReport, SelfTestLine, SelfTestReport};

/// Sender-receiver quantum protocols for matrix arithmetic, simulated exactly.
///
/// Matrices and vectors are JSON files of the form
/// {"rows": m, "cols": k, "data": [[re, im], ...]} in row-major order;
/// vectors use cols = 1.
#[derive(Debug, Parser)]
#[command(name = "senrec", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Simulation engine.
    #[arg(long, global = true, value_enum, default_value_t = EngineArg::Sector)]
    engine: EngineArg,
    /// Rescale inputs so every sender keeps a vacuum amplitude (default).
    #[arg(long, global = true, overrides_with = "no_auto_scale")]
    auto_scale: bool,
    /// Encode inputs as given; fail if a sender cannot be normalized.
    #[arg(long, global = true, overrides_with = "auto_scale")]
    no_auto_scale: bool,
    /// Minimum vacuum population kept by auto-scaling.
    #[arg(long, global = true, default_value_t = 0.25)]
    vacuum_floor: f64,
    /// Compare the decoded result with the classical oracle.
    #[arg(long, global = true)]
    verify: bool,
    /// Largest accepted deviation from the oracle.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write the receiver density matrix as JSON (dense engine only).
    #[arg(long, global = true, value_name = "PATH")]
    dump_receiver: Option<PathBuf>,
    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Qubit cap of the dense engine.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    /// Explicit W block (matrix JSON) used instead of the completion (dense engine only).
    /// It must be unitary and contain the protocol's prescribed rows.
    #[arg(long, global = true, value_name = "PATH")]
    w_block: Option<PathBuf>,
    /// Excitation sector of --w-block; defaults to the number of senders.
    #[arg(long, global = true, value_name = "N", requires = "w_block")]
    w_sector: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Dense,
    Sector,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Dense => Engine::Dense,
            EngineArg::Sector => Engine::Sector,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Matrix-vector product A v.
    Matvec {
        #[arg(short = 'a', long = "matrix", value_name = "A.json")]
        a: PathBuf,
        #[arg(short = 'v', long = "vector", value_name = "V.json")]
        v: PathBuf,
    },
    /// Matrix product A B.
    Matmul {
        #[arg(short = 'a', value_name = "A.json")]
        a: PathBuf,
        #[arg(short = 'b', value_name = "B.json")]
        b: PathBuf,
    },
    /// Matrix sum C + D.
    Sum {
        #[arg(short = 'c', value_name = "C.json")]
        c: PathBuf,
        #[arg(short = 'd', value_name = "D.json")]
        d: PathBuf,
        /// Extra amplitude shared by both senders.
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
    },
    /// Determinant of a square matrix.
    Det {
        #[arg(short = 'm', long = "matrix", value_name = "E.json")]
        m: PathBuf,
    },
    /// Inverse of a square matrix.
    Inv {
        #[arg(short = 'm', long = "matrix", value_name = "E.json")]
        m: PathBuf,
        /// Auxiliary-qubit amplitude.
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
    },
    /// Solution of E x = b for a unit vector b.
    Solve {
        #[arg(short = 'm', long = "matrix", value_name = "E.json")]
        m: PathBuf,
        #[arg(short = 'b', value_name = "B.json")]
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        /// Accept a non-unit b: solve for b/|b| and rescale the answer.
        #[arg(long)]
        normalize_b: bool,
    },
    /// Random instances of every operation checked against the oracle.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Instances per operation.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Largest matrix dimension drawn.
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = DenseComplexMatrix::from_json(&text)
        .and_then(|m| m.to_matrix())
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(m)
}

fn read_vector(path: &Path) -> Result<Vec<C64>> {
    let m = read_matrix(path)?;
    if !m.is_vector() {
        bail!(
            "{} holds a {}×{} matrix, expected a vector",
            path.display(),
            m.rows(),
            m.cols()
        );
    }
    Ok(m.data().to_vec())
}

impl Common {
    fn policy(&self) -> ScalePolicy {
        ScalePolicy {
            mode: if self.no_auto_scale {
                ScaleMode::Off
            } else {
                ScaleMode::Auto
            },
            target_vacuum_floor: self.vacuum_floor,
        }
    }

    fn dense_options(&self) -> DenseOptions<f64> {
        DenseOptions::with_cap(self.dense_cap)
    }
}

fn emit(common: &Common, text: String, json: impl serde::Serialize) -> Result<()> {
    if common.json {
        println!("{}", serde_json::to_string_pretty(&json)?);
    } else {
        print!("{text}");
    }
    Ok(())
}

fn run_protocol(
    common: &Common,
    input: ProtocolInput<f64>,
    options: PlanOptions,
) -> Result<Outcome> {
    let engine: Engine = common.engine.into();
    if common.dump_receiver.is_some() && engine != Engine::Dense {
        bail!(UsageError(
            "--dump-receiver needs --engine dense; the sector engine never forms the full density"
                .into()
        ));
    }
    if common.w_block.is_some() && engine != Engine::Dense {
        bail!(UsageError("--w-block needs --engine dense".into()));
    }
    let start = Instant::now();
    let plan = plan_for(&input, &options)?;
    let mut dense = common.dense_options();
    if let Some(path) = &common.w_block {
        let block = read_matrix(path)?.to_rows();
        dense
            .overrides
            .push((common.w_sector.unwrap_or(plan.order()), block));
    }
    let run = execute(&plan, engine, &dense)?;
    let mut report = RunReport::new(&plan, &run);
    if common.verify {
        report.verify(
            &run,
            &input.reference().context("oracle")?,
            common.tolerance,
        );
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    if let (Some(path), Some(dense)) = (&common.dump_receiver, &run.dense) {
        let dump = dense.receiver.to_json().to_json_pretty();
        std::fs::write(path, dump + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let passed = report.passed;
    emit(common, report.to_text(), &report)?;
    Ok(if passed == Some(false) {
        Outcome::VerificationFailed
    } else {
        Outcome::Done
    })
}

fn selftest(common: &Common, seed: u64, count: usize, max_dim: usize) -> Result<Outcome> {
    if common.dump_receiver.is_some() || common.w_block.is_some() {
        bail!(UsageError(
            "--dump-receiver and --w-block are not available for selftest".into()
        ));
    }
    let engine: Engine = common.engine.into();
    let start = Instant::now();
    let mut sampler = InstanceSampler::new(seed).with_guard(common.policy(), DEFAULT_SIGMA);
    let options = PlanOptions {
        policy: common.policy(),
        ..PlanOptions::default()
    };
    let mut lines = Vec::new();
    for op in Operation::ALL {
        let mut line = SelfTestLine {
            operation: op.name(),
            ..SelfTestLine::default()
        };
        for _ in 0..count {
            let input = sampler.instance::<f64>(op, max_dim)?;
            let plan = plan_for(&input, &options)?;
            let run = execute(&plan, engine, &common.dense_options())?;
            let dev = run
                .decoded
                .max_abs_diff(&input.reference()?)
                .unwrap_or(f64::INFINITY);
            line.instances += 1;
            line.max_deviation = line.max_deviation.max(dev);
            if dev.is_nan() || dev > common.tolerance {
                line.failures += 1;
            }
        }
        lines.push(line);
    }
    let passed = lines.iter().all(|l| l.failures == 0);
    let report = SelfTestReport {
        seed,
        engine: engine.name(),
        tolerance: common.tolerance,
        operations: lines,
        passed,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(common, report.to_text(), &report)?;
    Ok(if passed {
        Outcome::Done
    } else {
        Outcome::VerificationFailed
    })
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let common = &cli.common;
    if common.tolerance.is_nan() || common.tolerance < 0.0 {
        bail!(UsageError(format!(
            "--tolerance must be non-negative, got {}",
            common.tolerance
        )));
    }
    let mut options = PlanOptions {
        policy: common.policy(),
        ..PlanOptions::default()
    };
    let input = match cli.command {
        Command::Matvec { a, v } => ProtocolInput::MatVec {
            a: read_matrix(&a)?,
            v: read_vector(&v)?,
        },
        Command::Matmul { a, b } => ProtocolInput::MatMul {
            a: read_matrix(&a)?,
            b: read_matrix(&b)?,
        },
        Command::Sum { c, d, lambda } => {
            options.lambda = lambda;
            ProtocolInput::MatSum {
                c: read_matrix(&c)?,
                d: read_matrix(&d)?,
            }
        }
        Command::Det { m } => ProtocolInput::Determinant {
            e: read_matrix(&m)?,
        },
        Command::Inv { m, sigma } => {
            options.sigma = sigma;
            ProtocolInput::Inverse {
                e: read_matrix(&m)?,
            }
        }
        Command::Solve {
            m,
            b,
            sigma,
            normalize_b,
        } => {
            options.sigma = sigma;
            let b = read_vector(&b)?;
            if normalize_b {
                options.rhs = RhsPolicy::Normalize;
                let norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-10 {
                    eprintln!(
                        "warning: b has norm {norm}; solving for b/|b| and rescaling the solution"
                    );
                }
            }
            ProtocolInput::LinSolve {
                e: read_matrix(&m)?,
                b,
            }
        }
        Command::Selftest {
            seed,
            count,
            max_dim,
        } => return selftest(common, seed, count, max_dim),
    };
    run_protocol(common, input, options)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // 2 is reserved for verification failures
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("usage error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
