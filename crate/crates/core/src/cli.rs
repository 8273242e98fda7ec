//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, parse or validation error.
//! Diagnostics go to the error stream.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::channels::{random_channel, QuantumChannel};
use crate::error::Error;
use crate::graphs::{effect_basis, operator_graph, verify_round_trip};
use crate::io::{emit, parse, Document};
use crate::numerics::{eigenvalues_hermitian, HERMITIAN_TOL};
use crate::opsys::{EffectKind, OperatorSystem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "opgraph",
    version,
    about = "Operator systems, channels and their operator graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a channel whose operator graph is the given operator system.
    Synthesize {
        system: PathBuf,
        #[arg(long, default_value = "duan")]
        kind: EffectKind,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the operator graph of a channel as an operator system.
    Extract {
        channel: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the system -> effects -> channel -> graph round trip and report.
    Verify {
        system: PathBuf,
        #[arg(long, default_value = "duan")]
        kind: EffectKind,
    },
    /// Random operator system of the given dimension.
    RandomSystem {
        #[arg(long)]
        dim_h: usize,
        #[arg(long)]
        dim_s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random channel from a seeded Gaussian isometry.
    RandomChannel {
        #[arg(long)]
        dim_in: usize,
        #[arg(long)]
        dim_out: usize,
        #[arg(long)]
        kraus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print dimensions and invariant checks of a document.
    Info {
        file: PathBuf,
        /// Re-check invariants at construction tolerance; exit 1 if any fails.
        #[arg(long)]
        strict: bool,
    },
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

type CliResult = std::result::Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Synthesize {
            system,
            kind,
            output,
        } => {
            let system = load_system(&system)?;
            let basis = effect_basis(&system, kind).map_err(|e| e.at_stage("effect basis"))?;
            let channel = crate::channels::synthesize_channel(&basis)
                .map_err(|e| e.at_stage("channel synthesis"))?;
            write_document(&channel.into(), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Extract { channel, output } => {
            let channel = load_channel(&channel)?;
            let graph = operator_graph(&channel)?;
            write_document(&graph.system.into(), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { system, kind } => {
            let system = load_system(&system)?;
            let report = verify_round_trip(&system, kind)?;
            let summary = serde_json::to_string(&report).expect("report serializes");
            writeln!(out, "{}{summary}", report.render()).map_err(io_failure)?;
            Ok(if report.verdict { EXIT_OK } else { EXIT_FAILED })
        }
        Command::RandomSystem {
            dim_h,
            dim_s,
            seed,
            output,
        } => {
            let system = OperatorSystem::random(dim_h, dim_s, seed)?;
            write_document(&system.into(), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::RandomChannel {
            dim_in,
            dim_out,
            kraus,
            seed,
            output,
        } => {
            let channel = random_channel(dim_in, dim_out, kraus, seed)?;
            write_document(&channel.into(), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Info { file, strict } => {
            let doc = load(&file)?;
            let (lines, strict_ok) = describe(&doc)?;
            for line in lines {
                writeln!(out, "{line}").map_err(io_failure)?;
            }
            if strict {
                writeln!(out, "strict: {}", if strict_ok { "pass" } else { "fail" })
                    .map_err(io_failure)?;
                if !strict_ok {
                    return Ok(EXIT_FAILED);
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// Report lines plus whether the document meets construction tolerances.
fn describe(doc: &Document) -> std::result::Result<(Vec<String>, bool), Failure> {
    let mut lines = vec![format!("kind: {}", doc.kind())];
    let strict_ok = match doc {
        Document::Matrix(m) => {
            lines.push(format!("shape: {}x{}", m.rows(), m.cols()));
            lines.push(format!("frobenius norm: {:e}", m.frobenius_norm()));
            let hermitian = m.is_square()
                && m.hermiticity_defect() <= HERMITIAN_TOL * m.frobenius_norm().max(1.0);
            lines.push(format!("hermitian: {hermitian}"));
            if hermitian {
                let ev = eigenvalues_hermitian(m)?;
                lines.push(format!("spectrum: [{:e}, {:e}]", ev[0], ev[ev.len() - 1]));
            }
            true
        }
        Document::OperatorSystem(s) => {
            lines.push(format!("dim_h: {}", s.dim_h()));
            lines.push(format!("dim_s: {}", s.dim()));
            lines.push(format!(
                "orthonormality defect: {:e}",
                s.orthonormality_defect()
            ));
            let id = crate::numerics::ComplexMatrix::identity(s.dim_h());
            lines.push(format!("identity residual: {:e}", s.residual(&id)?));
            s.check_invariants(1e-9).is_ok()
        }
        Document::EffectBasis(e) => {
            let check = e.check()?;
            lines.push(format!("dim_h: {}", e.dim_h()));
            lines.push(format!("construction: {}", e.kind()));
            lines.push(format!("effects: {}", e.len()));
            lines.push(format!(
                "spectra: [{:e}, {:e}] within bounds: {}",
                check.min_eigenvalue, check.max_eigenvalue, check.spectrum_ok
            ));
            lines.push(format!("||sum A_k - I||_F: {:e}", check.sum_error));
            if e.kind() == EffectKind::Geometric {
                lines.push(format!(
                    "geometric bounds: max ||A_k|| 2^(k-1) = {}, ||I - A_1|| = {}",
                    check.geometric.max_scaled_norm, check.geometric.identity_defect
                ));
            }
            check.passes(e.kind())
        }
        Document::Channel(c) => {
            let check = c.check()?;
            lines.push(format!("dim_in: {}", c.dim_in()));
            lines.push(format!("dim_out: {}", c.dim_out()));
            lines.push(format!("kraus: {}", c.kraus_count()));
            lines.push(format!("tp error: {:e}", check.tp_error));
            lines.push(format!(
                "choi min eigenvalue: {:e}",
                check.choi_min_eigenvalue
            ));
            lines.push(format!(
                "choi marginal error: {:e}",
                check.choi_marginal_error
            ));
            check.passes()
        }
    };
    Ok((lines, strict_ok))
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

fn load(path: &Path) -> std::result::Result<Document, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })?;
    parse(&text).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })
}

fn wrong_kind(path: &Path, expected: &str, found: &Document) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!(
            "{}: expected a {expected} document, found {}",
            path.display(),
            found.kind()
        ),
    }
}

fn load_system(path: &Path) -> std::result::Result<OperatorSystem, Failure> {
    match load(path)? {
        Document::OperatorSystem(s) => Ok(s),
        other => Err(wrong_kind(path, "operator_system", &other)),
    }
}

fn load_channel(path: &Path) -> std::result::Result<QuantumChannel, Failure> {
    match load(path)? {
        Document::Channel(c) => Ok(c),
        other => Err(wrong_kind(path, "channel", &other)),
    }
}

fn write_document(
    doc: &Document,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let text = emit(doc);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("{}: {e}", p.display()),
        }),
        None => out.write_all(text.as_bytes()).map_err(io_failure),
    }
}
