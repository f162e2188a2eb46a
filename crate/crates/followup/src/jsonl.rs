//! Line-record files: one JSON object per line.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {} bad line(s): {}", path.display(), errors.len(), summarize(errors))]
    Lines { path: PathBuf, errors: Vec<LineError> },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl FormatError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        FormatError::Io { path: path.to_path_buf(), source }
    }

    pub fn invalid(path: &Path, message: impl Into<String>) -> Self {
        FormatError::Invalid { path: path.to_path_buf(), message: message.into() }
    }
}

fn summarize(errors: &[LineError]) -> String {
    let mut parts: Vec<String> = errors.iter().take(5).map(ToString::to_string).collect();
    if errors.len() > 5 {
        parts.push(format!("... {} more", errors.len() - 5));
    }
    parts.join("; ")
}

/// Records paired with their 1-based line numbers.
pub type Numbered<T> = Vec<(usize, T)>;

/// Parses every non-blank line, keeping 1-based line numbers. Bad lines are
/// collected rather than skipped.
pub fn parse_numbered<T: DeserializeOwned>(reader: impl BufRead) -> io::Result<(Numbered<T>, Vec<LineError>)> {
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => items.push((i + 1, v)),
            Err(e) => errors.push(LineError { line: i + 1, message: e.to_string() }),
        }
    }
    Ok((items, errors))
}

pub fn read_numbered<T: DeserializeOwned>(path: &Path) -> Result<Numbered<T>, FormatError> {
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let (items, errors) = parse_numbered(BufReader::new(file)).map_err(|e| FormatError::io(path, e))?;
    if errors.is_empty() {
        Ok(items)
    } else {
        Err(FormatError::Lines { path: path.to_path_buf(), errors })
    }
}

/// Reads a whole file; any malformed line fails the read.
pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    Ok(read_numbered(path)?.into_iter().map(|(_, v)| v).collect())
}

/// Writes records through a temporary file in the target directory, so a
/// failed write never leaves a partial file behind.
pub fn write<'a, T, I>(path: &Path, items: I) -> Result<(), FormatError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    write_with(path, |w| {
        for item in items {
            serde_json::to_writer(&mut *w, item).map_err(io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Atomic write of arbitrary content.
pub fn write_with(path: &Path, body: impl FnOnce(&mut BufWriter<&mut File>) -> io::Result<()>) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let err = |e| FormatError::io(path, e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).map_err(err)?;
        w.flush().map_err(err)?;
    }
    tmp.persist(path).map_err(|e| FormatError::io(path, e.error))?;
    Ok(())
}
