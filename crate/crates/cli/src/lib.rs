//! Command dispatch for the `aomsim` binary.
//!
//! Exit codes: 0 verified, 1 negative verification result (a non-unitary
//! element), 2 usage, input or verification failure.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use aomsim_core::elements::{unitarity_deviation, UNITARITY_TOLERANCE};
use aomsim_core::protocols::DEFAULT_TOLERANCE;
use aomsim_core::{json, outcome_table, run_ghz, run_swap, ElementSpec, Error, ProtocolReport};
use clap::{Parser, Subcommand};

use crate::config::CircuitConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "aomsim", version, about = "Frequency-bin linear optics with acousto-optic modulators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// Emit CSV.
    #[arg(long, global = true)]
    pub csv: bool,

    /// Verification tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement swapping through two AOMs.
    Swap,
    /// GHZ creation through one AOM.
    Ghz,
    /// Check an element JSON file for unitarity.
    CheckUnitary { file: PathBuf },
    /// Evolve a circuit file and print its outcome table.
    Run { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    out: Option<&'a Path>,
}

impl Io<'_> {
    fn emit(&mut self, text: &str) -> i32 {
        let body = if text.ends_with('\n') {
            text.to_string()
        } else {
            format!("{text}\n")
        };
        match self.out {
            Some(path) => match fs::write(path, body) {
                Ok(()) => EXIT_OK,
                Err(e) => self.fail(&format!("cannot write {}: {e}", path.display())),
            },
            None => {
                let _ = self.stdout.write_all(body.as_bytes());
                EXIT_OK
            }
        }
    }

    fn fail(&mut self, message: &str) -> i32 {
        let _ = writeln!(self.stderr, "error: {message}");
        EXIT_ERROR
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let mut io = Io {
        stdout,
        stderr,
        out: cli.out.as_deref(),
    };
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return io.fail(&format!("tolerance must be positive and finite, got {}", cli.tol));
    }
    let format = if cli.csv { Format::Csv } else { Format::Json };
    match &cli.command {
        Command::Swap => cmd_protocol(run_swap(), format, cli.tol, &mut io),
        Command::Ghz => cmd_protocol(run_ghz(), format, cli.tol, &mut io),
        Command::CheckUnitary { file } => cmd_check_unitary(file, format, &mut io),
        Command::Run { file } => cmd_run(file, format, &mut io),
    }
}

fn cmd_protocol(report: ProtocolReport, format: Format, tol: f64, io: &mut Io<'_>) -> i32 {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let code = io.emit(&text);
    if code != EXIT_OK {
        return code;
    }
    let failed: Vec<_> = report.verify(tol).into_iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        return EXIT_OK;
    }
    for c in &failed {
        let _ = writeln!(io.stderr, "verification failed: {}: {}", c.name, c.detail);
    }
    EXIT_ERROR
}

fn read(path: &Path, io: &mut Io<'_>) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| io.fail(&format!("cannot read {}: {e}", path.display())))
}

fn cmd_check_unitary(path: &Path, format: Format, io: &mut Io<'_>) -> i32 {
    let text = match read(path, io) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let spec = match ElementSpec::from_json(&text) {
        Ok(s) => s,
        Err(e) => {
            return io.fail(&format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        }
    };
    let matrix = match spec.matrix() {
        Ok(m) => m,
        Err(e) => return io.fail(&e.to_string()),
    };
    let deviation = unitarity_deviation(&matrix);
    let unitary = match spec.build() {
        Ok(_) => true,
        Err(Error::NonUnitary { .. }) => false,
        Err(e) => return io.fail(&e.to_string()),
    };
    debug_assert_eq!(unitary, deviation <= UNITARITY_TOLERANCE);
    let text = match format {
        Format::Json => format!(
            "{{\"unitary\":{unitary},\"deviation\":{}}}",
            json::float(deviation)
        ),
        Format::Csv => format!("unitary,deviation\n{unitary},{}", json::float(deviation)),
    };
    let code = io.emit(&text);
    if code != EXIT_OK {
        return code;
    }
    if unitary {
        EXIT_OK
    } else {
        let _ = writeln!(
            io.stderr,
            "not unitary: max |M†M - I| entry {}",
            json::float(deviation)
        );
        EXIT_NEGATIVE
    }
}

fn cmd_run(path: &Path, format: Format, io: &mut Io<'_>) -> i32 {
    let text = match read(path, io) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let config = match CircuitConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return io.fail(&format!("{}: {e}", path.display())),
    };
    let state = match config.evolve() {
        Ok(s) => s,
        Err(e) => return io.fail(&format!("{}: {e}", path.display())),
    };
    let table = match outcome_table(&state, &config.detectors) {
        Ok(t) => t,
        Err(e) => return io.fail(&format!("{}: detectors: {e}", path.display())),
    };
    let text = match format {
        Format::Json => table.to_json(),
        Format::Csv => table.to_csv(),
    };
    io.emit(&text)
}
