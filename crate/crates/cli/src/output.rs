//! Atomic file output and error records.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bfnlab_core::Error;
use serde::Serialize;
use tempfile::NamedTempFile;

/// Exit status for usage errors and malformed inputs.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for budget and cap failures.
pub const EXIT_BUDGET: i32 = 3;
/// Exit status for anything else (I/O, numerical failures).
pub const EXIT_OTHER: i32 = 1;

/// Error raised by the CLI itself for bad argument combinations.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

/// Exit code and kind for an error chain.
pub fn classify(err: &anyhow::Error) -> (i32, &'static str) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return (EXIT_USAGE, "usage");
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                e if e.is_budget() => (EXIT_BUDGET, "budget"),
                Error::Malformed(_) | Error::Json(_) => (EXIT_USAGE, "malformed_input"),
                Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::BasisMismatch { .. }
                | Error::DegreeViolation { .. } => (EXIT_USAGE, "invalid_parameter"),
                _ => (EXIT_OTHER, "runtime"),
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return (EXIT_USAGE, "malformed_input");
        }
    }
    (EXIT_OTHER, "runtime")
}

/// Prints a machine-readable error record on stderr and returns the exit code.
pub fn report_error(err: &anyhow::Error) -> i32 {
    let (code, kind) = classify(err);
    let record = ErrorRecord {
        error: kind,
        message: format!("{err:#}"),
        exit_code: code,
    };
    eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
    code
}

/// Files staged next to their destinations and renamed into place together.
#[derive(Default)]
pub struct Outputs {
    staged: Vec<(NamedTempFile, PathBuf)>,
}

impl Outputs {
    pub fn new() -> Self {
        Outputs::default()
    }

    pub fn add(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("cannot stage {}", path.display()))?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        for (tmp, path) in self.staged {
            tmp.persist(&path).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}

/// Writes `text` to `path` atomically, or to stdout when `path` is absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = Outputs::new();
            out.add(p, text.as_bytes())?;
            out.commit()
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Fills a fresh directory: files go to a staging directory beside `dir`,
/// which is renamed to `dir` once complete. `dir` must not exist or be empty.
pub fn write_dir(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    if dir.exists() && (!dir.is_dir() || std::fs::read_dir(dir)?.next().is_some()) {
        bail!(UsageError(format!("{} exists and is not an empty directory", dir.display())));
    }
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let staging = tempfile::Builder::new().prefix(".bfnlab-").tempdir_in(parent)?;
    for (name, bytes) in files {
        std::fs::write(staging.path().join(name), bytes)?;
    }
    if dir.exists() {
        std::fs::remove_dir(dir)?;
    }
    let staged = staging.keep();
    std::fs::rename(&staged, dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(())
}
