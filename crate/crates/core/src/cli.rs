//! The `ontofact` command line.
//!
//! Exit codes: 0 on success, 1 when an input fails validation or
//! verification (or a resource / rationalization limit is hit), 2 on usage
//! errors and unreadable or malformed input.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::analyze;
use crate::compression::{
    compress_method1, compress_method2, exhaustive_method1, BlockUniformOF, CompressionParams,
};
use crate::error::Error;
use crate::factorization::{
    bounds_report, determinize, model1, model2, model3, parse_factorization,
    serialize_factorization, verify_of, DeterminizePolicy,
};
use crate::quantum::{
    kernaghan_instance, kernaghan_table, pauli_qubit_table, realize, serialize_realization,
    verify_realization, KsInstance, DEFAULT_KS_CAP,
};
use crate::render::{render_factorization, render_table, ImageFormat};
use crate::table::{
    binary_worst_case_table, parse_table, random_table, serialize_table, DataTable,
};

#[derive(Parser, Debug)]
#[command(
    name = "ontofact",
    version,
    about = "Exact ontological factorizations of data tables"
)]
struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a data table.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Build a factorization of a table.
    Factor(FactorArgs),
    /// Check that a factorization reproduces a table exactly.
    Verify { table: PathBuf, of: PathBuf },
    /// Lower and upper bounds on the ontic-state count.
    Bounds { table: PathBuf },
    /// Reduce the ontic-state count of a factorization.
    Compress(CompressArgs),
    /// Classification, contextuality and deficiency report.
    Analyze { table: PathBuf, of: PathBuf },
    /// Quantum realization of a table.
    Realize {
        table: PathBuf,
        /// Largest accepted Born-rule mismatch.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Search for a noncontextual truth assignment.
    KsCheck {
        /// `kernaghan` or a path to a KS instance document.
        input: String,
        #[arg(long, default_value_t = DEFAULT_KS_CAP)]
        cap: usize,
    },
    /// Draw a table or factorization as a heatmap.
    Render(RenderArgs),
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Qubit with the X, Y, Z eigenstates and measurements.
    Pauli,
    /// The 20-state, 11-measurement Kernaghan set.
    Kernaghan,
    /// All-binary table whose columns are every m-bit string.
    BinaryWorst {
        #[arg(long)]
        m: usize,
    },
    /// Seeded random rational table.
    Random {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        denominator_bound: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Contiguous,
    Random,
}

#[derive(Args, Debug)]
struct FactorArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    model: u8,
    /// Expand into a deterministic factorization.
    #[arg(long)]
    determinize: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::Contiguous, requires = "determinize")]
    policy: PolicyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    table: PathBuf,
}

#[derive(Args, Debug)]
struct CompressArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    method: u8,
    /// Enumerate every configuration (method 1 only).
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long, default_value_t = 1 << 22)]
    exhaustive_cap: u64,
    table: PathBuf,
    of: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Ppm,
    Svg,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Table or factorization document.
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    cell_px: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Ppm)]
    format: FormatArg,
    /// Table used to draw measurement blocks of a factorization's M.
    #[arg(long)]
    table: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Rejected(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Structural(_) => Failure::Usage(e.to_string()),
            _ => Failure::Rejected(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_table(path: &Path) -> CliResult<DataTable> {
    parse_table(&read(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: Error) -> Failure {
    match Failure::from(e) {
        Failure::Usage(msg) => Failure::Usage(format!("{}: {msg}", path.display())),
        Failure::Rejected(msg) => Failure::Rejected(format!("{}: {msg}", path.display())),
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

fn text(mut s: String) -> Vec<u8> {
    s.push('\n');
    s.into_bytes()
}

/// Output bytes plus whether the command's check passed.
struct Outcome {
    bytes: Vec<u8>,
    passed: bool,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Outcome {
            bytes,
            passed: true,
        }
    }
}

#[derive(Serialize)]
struct KsReport {
    n: usize,
    contexts: usize,
    parity_obstruction: bool,
    satisfiable: bool,
    assignment: Option<Vec<bool>>,
}

fn execute(command: Command, diag: &mut dyn Write) -> CliResult<Outcome> {
    match command {
        Command::Gen { kind } => {
            let table = match kind {
                GenKind::Pauli => pauli_qubit_table(),
                GenKind::Kernaghan => kernaghan_table(),
                GenKind::BinaryWorst { m } => binary_worst_case_table(m)?,
                GenKind::Random {
                    d,
                    m,
                    s,
                    seed,
                    denominator_bound,
                } => random_table(d, m, s, seed, denominator_bound)?,
            };
            Ok(Outcome::ok(text(serialize_table(&table))))
        }
        Command::Factor(args) => {
            let table = read_table(&args.table)?;
            let f = match args.model {
                1 => model1(&table)?,
                2 => model2(&table)?,
                _ => model3(&table)?,
            };
            let f = if args.determinize {
                let policy = match args.policy {
                    PolicyArg::Contiguous => DeterminizePolicy::Contiguous,
                    PolicyArg::Random => DeterminizePolicy::SeededRandom { seed: args.seed },
                };
                determinize(&table, &f, policy)?
            } else {
                f
            };
            Ok(Outcome::ok(text(serialize_factorization(&f))))
        }
        Command::Verify { table, of } => {
            let t = read_table(&table)?;
            let report = t.validate();
            if !report.valid {
                return Ok(Outcome {
                    bytes: json(&report),
                    passed: false,
                });
            }
            let f = parse_factorization(&read(&of)?).map_err(|e| with_path(&of, e))?;
            let report = verify_of(&t, &f)?;
            Ok(Outcome {
                passed: report.valid,
                bytes: json(&report),
            })
        }
        Command::Bounds { table } => {
            let t = read_table(&table)?;
            Ok(Outcome::ok(json(&bounds_report(&t)?)))
        }
        Command::Compress(args) => {
            let t = read_table(&args.table)?;
            let f = parse_factorization(&read(&args.of)?).map_err(|e| with_path(&args.of, e))?;
            let params = CompressionParams {
                seed: args.seed,
                restarts: args.restarts,
                iterations: args.iterations,
                exhaustive_cap: args.exhaustive_cap,
            };
            let input_omega = f.omega();
            let out = match (args.method, args.exhaustive) {
                (1, true) => exhaustive_method1(&t, &BlockUniformOF::new(f)?, &params)?,
                (1, false) => compress_method1(&t, &BlockUniformOF::new(f)?, &params)?,
                (_, false) => compress_method2(&t, &f, &params)?,
                (_, true) => {
                    return Err(Failure::Usage(
                        "--exhaustive applies to method 1 only".into(),
                    ))
                }
            };
            let _ = writeln!(diag, "omega {input_omega} -> {}", out.omega());
            Ok(Outcome::ok(text(serialize_factorization(&out))))
        }
        Command::Analyze { table, of } => {
            let t = read_table(&table)?;
            let f = parse_factorization(&read(&of)?).map_err(|e| with_path(&of, e))?;
            Ok(Outcome::ok(json(&analyze(&t, &f)?)))
        }
        Command::Realize { table, tol } => {
            let t = read_table(&table)?;
            let real = realize(&t)?;
            let err = verify_realization(&t, &real)?;
            let _ = writeln!(diag, "max Born-rule error {err:e} (dimension {})", real.dim);
            Ok(Outcome {
                bytes: text(serialize_realization(&real)),
                passed: err <= tol,
            })
        }
        Command::KsCheck { input, cap } => {
            let inst = if input == "kernaghan" {
                kernaghan_instance()
            } else {
                let path = Path::new(&input);
                KsInstance::from_json(&read(path)?).map_err(|e| with_path(path, e))?
            };
            let assignment = crate::quantum::ks_noncontextual_search_with_cap(&inst, cap)?;
            Ok(Outcome::ok(json(&KsReport {
                n: inst.n_projectors(),
                contexts: inst.contexts().len(),
                parity_obstruction: inst.has_parity_obstruction(),
                satisfiable: assignment.is_some(),
                assignment,
            })))
        }
        Command::Render(args) => {
            let format = match args.format {
                FormatArg::Ppm => ImageFormat::Ppm,
                FormatArg::Svg => ImageFormat::Svg,
            };
            let bytes = read(&args.input)?;
            let image = match parse_table(&bytes) {
                Ok(t) => render_table(&t, args.cell_px, format)?,
                Err(table_err) => {
                    let f = parse_factorization(&bytes)
                        .map_err(|_| with_path(&args.input, table_err))?;
                    let d = match &args.table {
                        Some(p) => Some(read_table(p)?.d()),
                        None => None,
                    };
                    render_factorization(&f, d, args.cell_px, format)?
                }
            };
            Ok(Outcome::ok(image))
        }
    }
}

fn report(stderr: &mut dyn Write, color: bool, msg: &str) {
    if color {
        let _ = writeln!(stderr, "\x1b[31merror:\x1b[0m {msg}");
    } else {
        let _ = writeln!(stderr, "error: {msg}");
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = if color {
                e.render().ansi().to_string()
            } else {
                e.render().to_string()
            };
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let out_path = cli.out.clone();
    match execute(cli.command, stderr) {
        Ok(outcome) => {
            let written = match &out_path {
                Some(p) => {
                    std::fs::write(p, &outcome.bytes).map_err(|e| format!("{}: {e}", p.display()))
                }
                None => stdout.write_all(&outcome.bytes).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                report(stderr, color, &msg);
                return 2;
            }
            if outcome.passed {
                0
            } else {
                report(stderr, color, "check failed");
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            report(stderr, color, &msg);
            2
        }
        Err(Failure::Rejected(msg)) => {
            report(stderr, color, &msg);
            1
        }
    }
}

/// [`run_with`] on the process's own streams; color follows the terminal
/// and `NO_COLOR`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let color = std::io::stderr().is_terminal() && std::env::var_os("NO_COLOR").is_none();
    run_with(
        args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
        color,
    )
}
