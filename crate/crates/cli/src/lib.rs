//! Command-line front end: critical lengths, EC tests, sweeps, splice region
//! scans, design curves and reference values.
//!
//! Exit codes: 0 success (and EC for `ectest`), 1 NotEC, 2 Inconclusive,
//! 64 usage, 65 bad input data, 70 numerical or internal failure.

pub mod instances;
pub mod operator;
pub mod output;
pub mod region;
pub mod sweep;

mod commands;

use std::io::Write;

use clap::Parser;

pub use commands::{Cli, Command, Format, OracleCommand, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Data(_) => 65,
            CliError::Internal(_) => 70,
        }
    }
}

impl From<eclen::Error> for CliError {
    fn from(e: eclen::Error) -> Self {
        use eclen::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidPolynomial(_)
            | E::InvalidRoots(_)
            | E::NonFinite
            | E::MultiplicityMismatch { .. }
            | E::InvalidKnots(_)
            | E::DimensionMismatch(..)
            | E::OutOfDomain(_)
            | E::NotDesignSpace
            | E::ConstantsAbsent(_)
            | E::NotGoodForDesign { .. }
            | E::NotEC
            | E::OutOfRegime(_)
            | E::InvalidArgument(_)
            | E::OrderTooHigh { .. }
            | E::NotPositive { .. }
            | E::NoBasisEvidence { .. }
            | E::RankDeficient(_) => CliError::Data(msg),
            _ => CliError::Internal(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Primary output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = if cli.config.jobs > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(cli.config.jobs)
            .build()
        {
            Ok(pool) => pool.install(|| commands::execute(&cli)),
            Err(e) => Err(CliError::Internal(e.to_string())),
        }
    } else {
        commands::execute(&cli)
    };
    match result {
        Ok((text, code)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 70;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
