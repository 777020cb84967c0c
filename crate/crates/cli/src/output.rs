use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("model: {0}")]
    Model(mangoldt::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Compute(#[from] mangoldt::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Artifacts buffered in memory and written together once the command has
/// finished.
#[derive(Debug)]
pub struct Artifacts {
    dir: Option<PathBuf>,
    pending: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Artifacts { dir, pending: Vec::new() }
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> CliResult<()> {
        if self.enabled() {
            let mut bytes = serde_json::to_vec_pretty(value).map_err(mangoldt::Error::from)?;
            bytes.push(b'\n');
            self.pending.push((name.to_string(), bytes));
        }
        Ok(())
    }

    pub fn csv<F>(&mut self, name: &str, write: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> mangoldt::Result<()>,
    {
        if self.enabled() {
            let mut bytes = Vec::new();
            write(&mut bytes)?;
            self.pending.push((name.to_string(), bytes));
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.pending.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn flush(self) -> CliResult<Vec<PathBuf>> {
        let Some(dir) = self.dir else {
            return Ok(Vec::new());
        };
        fs::create_dir_all(&dir).map_err(|source| io_error(&dir, source))?;
        let mut written = Vec::with_capacity(self.pending.len());
        for (name, bytes) in self.pending {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|source| io_error(&path, source))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_artifacts_write_nothing() {
        let mut a = Artifacts::new(None);
        a.json("x.json", &1.0).unwrap();
        assert!(a.names().is_empty());
        assert!(a.flush().unwrap().is_empty());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Model(mangoldt::Error::UnknownModel("x".into())).exit_code(), 2);
        assert_eq!(CliError::Compute(mangoldt::Error::Precondition("x".into())).exit_code(), 1);
    }
}
