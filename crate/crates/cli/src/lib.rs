//! Batch command-line runs over the `sumdec-core` building blocks.

mod args;
mod commands;
mod output;
pub mod text;

use std::path::{Path, PathBuf};

use sumdec_core::corpus::CorpusError;
use thiserror::Error;

pub use args::{parse_args, render, Command, LmParams, Overrides, RunConfig};
pub use commands::{pipeline_files, run};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Clap(Box<clap::Error>),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid data: {0}")]
    Data(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn from_corpus(path: &Path, e: CorpusError) -> Self {
        match e {
            CorpusError::Io(source) => CliError::io(path, source),
            other => CliError::Data(format!("{}: {other}", path.display())),
        }
    }

    /// 0 for help/version output, 2 usage, 3 I/O, 4 invalid data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Data(_) => 4,
        }
    }
}

/// Parses `argv` (without the program name), runs it and returns the
/// process exit status. Errors go to stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let outcome = parse_args(argv).and_then(|config| run(&config));
    match outcome {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
