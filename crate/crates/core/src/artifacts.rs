//! Text artifacts, checksums, run manifest and the output-directory lock.

use std::fs::{self, File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Matrix CSV: the first row holds the column axis after a corner label, every
/// following row starts with its row-axis value.
pub fn write_matrix_csv(path: &Path, corner: &str, rows: &[f64], cols: &[f64], data: &DMatrix<f64>) -> Result<()> {
    let mut s = String::with_capacity(24 * (data.len() + rows.len() + cols.len()));
    s.push_str(corner);
    for c in cols {
        s.push_str(&format!(",{c}"));
    }
    s.push('\n');
    for (r, rv) in rows.iter().enumerate() {
        s.push_str(&format!("{rv}"));
        for c in 0..data.ncols() {
            s.push_str(&format!(",{}", data[(r, c)]));
        }
        s.push('\n');
    }
    write_text(path, &s)
}

/// Inverse of [`write_matrix_csv`]: (row axis, column axis, data).
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, DMatrix<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, message: &str| Error::Format {
        path: path.into(),
        line,
        message: message.into(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let cols: Vec<f64> = header
        .split(',')
        .skip(1)
        .map(|v| v.parse().map_err(|_| bad(1, "bad column axis value")))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut it = line.split(',');
        let rv = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(i + 2, "bad row axis value"))?;
        rows.push(rv);
        let row: Vec<f64> = it
            .map(|v| v.parse().map_err(|_| bad(i + 2, "bad matrix value")))
            .collect::<Result<_>>()?;
        if row.len() != cols.len() {
            return Err(bad(i + 2, "row length differs from the column axis"));
        }
        vals.extend(row);
    }
    let m = DMatrix::from_row_slice(rows.len(), cols.len(), &vals);
    Ok((rows, cols, m))
}

/// Two-column CSV with a header line.
pub fn write_columns_csv(path: &Path, header: (&str, &str), xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut s = format!("{},{}\n", header.0, header.1);
    for (x, y) in xs.iter().zip(ys) {
        s.push_str(&format!("{x},{y}\n"));
    }
    write_text(path, &s)
}

/// Inverse of [`write_columns_csv`].
pub fn read_columns_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate().skip(1) {
        let parsed = line
            .split_once(',')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
        let (x, y): (f64, f64) = parsed.ok_or_else(|| Error::Format {
            path: path.into(),
            line: i + 1,
            message: "expected two numbers".into(),
        })?;
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Record of one run: configuration hash, toolkit version, wall-clock
/// timestamps and every artifact with its checksum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub version: String,
    pub command: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(config_sha256: String, command: &str) -> Self {
        Self {
            config_sha256,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            started_unix_s: now(),
            finished_unix_s: 0,
            artifacts: Vec::new(),
        }
    }

    /// Load the manifest in `dir` if present, otherwise start a new one.
    /// Entries from earlier commands are kept so the manifest covers the whole directory.
    pub fn open(dir: &Path, config_sha256: String, command: &str) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let mut m = Self::new(config_sha256, command);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(old) = serde_json::from_str::<RunManifest>(&text) {
                if old.config_sha256 == m.config_sha256 {
                    m.artifacts = old.artifacts;
                }
            }
        }
        Ok(m)
    }

    /// Add or refresh the checksum of an artifact inside `dir`.
    pub fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        let sha256 = sha256_file(&dir.join(name))?;
        match self.artifacts.iter_mut().find(|a| a.path == name) {
            Some(a) => a.sha256 = sha256,
            None => self.artifacts.push(ArtifactEntry {
                path: name.to_string(),
                sha256,
            }),
        }
        Ok(())
    }

    pub fn save(&mut self, dir: &Path) -> Result<()> {
        self.finished_unix_s = now();
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        write_json(&dir.join(MANIFEST_NAME), self)
    }

    /// Check every listed artifact exists and matches its checksum.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for a in &self.artifacts {
            let got = sha256_file(&dir.join(&a.path))?;
            if got != a.sha256 {
                return Err(Error::Numeric(format!("checksum mismatch for {}", a.path)));
            }
        }
        Ok(())
    }
}

/// Exclusive lock on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

pub const LOCK_NAME: &str = ".qpm.lock";

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(Error::io(
                &path,
                std::io::Error::new(ErrorKind::AlreadyExists, "output directory is locked by another run"),
            )),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Create an empty file, truncating any existing one.
pub fn touch(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}
