//! Outputs are staged in temporary files next to their destination and only
//! renamed into place once every output of a command has been written.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes a new temporary file destined for `path`.
    pub fn write<F>(&mut self, path: &Path, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
        {
            let mut out = BufWriter::new(tmp.as_file());
            fill(&mut out)?;
            out.flush().map_err(|e| CliError::io(path, e))?;
        }
        self.files.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn write_bytes(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        self.write(path, |out| {
            out.write_all(bytes).map_err(|e| CliError::io(path, e))
        })
    }

    /// Moves every staged file into place. Anything not yet committed is
    /// deleted when `self` is dropped.
    pub fn commit(self) -> Result<(), CliError> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (tmp, path) in self.files {
            if let Err(e) = tmp.persist(&path) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::io(&path, e.error));
            }
            done.push(path);
        }
        Ok(())
    }
}

/// Creates `dir` if needed.
pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Serializes `items` one JSON document per line.
pub fn jsonl<'a, T: serde::Serialize + 'a>(
    path: &Path,
    items: impl IntoIterator<Item = &'a T>,
) -> impl FnOnce(&mut dyn Write) -> Result<(), CliError> + 'a {
    let path = path.to_path_buf();
    let items: Vec<&'a T> = items.into_iter().collect();
    move |out| {
        for item in items {
            serde_json::to_writer(&mut *out, item).map_err(|e| CliError::Data(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_lands_without_commit() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.txt");
        let mut staged = Staged::new();
        staged.write_bytes(&target, b"x").unwrap();
        drop(staged);
        assert!(!target.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn commit_places_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        let mut staged = Staged::new();
        staged.write_bytes(&a, b"1").unwrap();
        staged.write_bytes(&b, b"2").unwrap();
        staged.commit().unwrap();
        assert_eq!(fs::read(&a).unwrap(), b"1");
        assert_eq!(fs::read(&b).unwrap(), b"2");
    }
}
