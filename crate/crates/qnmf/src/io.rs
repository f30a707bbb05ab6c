//! On-disk formats for data, factors and run artifacts.
//!
//! Data and source tables are CSV in Stokes order (`S0,S1,S2,S3`); the
//! quaternion component layout is an implementation detail applied only
//! at load time. Numbers are written with 17 significant digits so every
//! 64-bit float round-trips losslessly, and loading a canonical file then
//! saving it reproduces it byte for byte. All writes go through a
//! temp-file-and-rename so readers never observe partial files.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::matrix::{QuaternionMatrix, RealMatrix};
use crate::stokes::{quaternion_to_stokes, stokes_to_quaternion, StokesSample};

/// Errors from reading and writing artifact files.
#[derive(Debug)]
pub enum IoError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Parse {
                path,
                line,
                message,
            } => write!(f, "{}:{line}: {message}", path.display()),
        }
    }
}

impl std::error::Error for IoError {}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Decimal with 17 significant digits: lossless for 64-bit floats.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(path))?;
    let mut tmp = dir.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".to_string());
    tmp.push(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(contents.as_bytes()).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Quaternion tables (data matrix X and source matrix W)
// ---------------------------------------------------------------------------

fn quaternion_table_to_csv(m: &QuaternionMatrix, index_names: (&str, &str)) -> String {
    let mut out = String::new();
    out.push_str(&format!("{},{},S0,S1,S2,S3\n", index_names.0, index_names.1));
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let s = quaternion_to_stokes(m[(r, c)]);
            out.push_str(&format!(
                "{r},{c},{},{},{},{}\n",
                fmt_f64(s.s0),
                fmt_f64(s.s1),
                fmt_f64(s.s2),
                fmt_f64(s.s3)
            ));
        }
    }
    out
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    name: &str,
    raw: &str,
) -> Result<T, IoError> {
    raw.trim().parse().map_err(|_| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("field '{name}': cannot parse '{raw}'"),
    })
}

fn parse_quaternion_table(
    path: &Path,
    contents: &str,
    index_names: (&str, &str),
) -> Result<QuaternionMatrix, IoError> {
    let expected_header = format!("{},{},S0,S1,S2,S3", index_names.0, index_names.1);
    let mut lines = contents.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != expected_header {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header '{expected_header}', found '{header}'"),
        });
    }
    let mut entries: Vec<StokesSample> = Vec::new();
    let mut indices: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let r: usize = parse_field(path, line, index_names.0, fields[0])?;
        let c: usize = parse_field(path, line, index_names.1, fields[1])?;
        let s0: f64 = parse_field(path, line, "S0", fields[2])?;
        let s1: f64 = parse_field(path, line, "S1", fields[3])?;
        let s2: f64 = parse_field(path, line, "S2", fields[4])?;
        let s3: f64 = parse_field(path, line, "S3", fields[5])?;
        indices.push((r, c));
        entries.push(StokesSample::new(s0, s1, s2, s3));
    }
    if entries.is_empty() {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "table has no data rows".to_string(),
        });
    }
    let rows = indices.iter().map(|(r, _)| r + 1).max().unwrap();
    let cols = indices.iter().map(|(_, c)| c + 1).max().unwrap();
    if entries.len() != rows * cols {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: indices.len() + 1,
            message: format!(
                "expected {rows}x{cols} = {} dense rows, found {}",
                rows * cols,
                entries.len()
            ),
        });
    }
    for (k, &(r, c)) in indices.iter().enumerate() {
        let want = (k / cols, k % cols);
        if (r, c) != want {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line: k + 2,
                message: format!(
                    "indices must be dense row-major: expected ({},{}), found ({r},{c})",
                    want.0, want.1
                ),
            });
        }
    }
    let mut out = QuaternionMatrix::zeros(rows, cols);
    for (k, s) in entries.into_iter().enumerate() {
        out[(k / cols, k % cols)] = stokes_to_quaternion(s);
    }
    Ok(out)
}

/// Write a data matrix as a Stokes table (`m,n,S0,S1,S2,S3`).
pub fn write_stokes_table(path: &Path, x: &QuaternionMatrix) -> Result<(), IoError> {
    write_atomic(path, &quaternion_table_to_csv(x, ("m", "n")))
}

/// Read a Stokes table written by [`write_stokes_table`].
pub fn read_stokes_table(path: &Path) -> Result<QuaternionMatrix, IoError> {
    let contents = fs::read_to_string(path).map_err(io_err(path))?;
    parse_quaternion_table(path, &contents, ("m", "n"))
}

/// Write a source matrix as a Stokes table (`m,p,S0,S1,S2,S3`).
pub fn write_source_matrix(path: &Path, w: &QuaternionMatrix) -> Result<(), IoError> {
    write_atomic(path, &quaternion_table_to_csv(w, ("m", "p")))
}

/// Read a source matrix written by [`write_source_matrix`].
pub fn read_source_matrix(path: &Path) -> Result<QuaternionMatrix, IoError> {
    let contents = fs::read_to_string(path).map_err(io_err(path))?;
    parse_quaternion_table(path, &contents, ("m", "p"))
}

// ---------------------------------------------------------------------------
// Activation tables
// ---------------------------------------------------------------------------

/// Write an activation matrix (`p,n,h`).
pub fn write_activation_matrix(path: &Path, h: &RealMatrix) -> Result<(), IoError> {
    let mut out = String::from("p,n,h\n");
    for p in 0..h.rows() {
        for n in 0..h.cols() {
            out.push_str(&format!("{p},{n},{}\n", fmt_f64(h[(p, n)])));
        }
    }
    write_atomic(path, &out)
}

/// Read an activation matrix written by [`write_activation_matrix`].
pub fn read_activation_matrix(path: &Path) -> Result<RealMatrix, IoError> {
    let contents = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = contents.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != "p,n,h" {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header 'p,n,h', found '{header}'"),
        });
    }
    let mut values = Vec::new();
    let mut indices = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let p: usize = parse_field(path, line, "p", fields[0])?;
        let n: usize = parse_field(path, line, "n", fields[1])?;
        let v: f64 = parse_field(path, line, "h", fields[2])?;
        indices.push((p, n));
        values.push(v);
    }
    if values.is_empty() {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "table has no data rows".to_string(),
        });
    }
    let rows = indices.iter().map(|(p, _)| p + 1).max().unwrap();
    let cols = indices.iter().map(|(_, n)| n + 1).max().unwrap();
    if values.len() != rows * cols {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: indices.len() + 1,
            message: format!(
                "expected {rows}x{cols} = {} dense rows, found {}",
                rows * cols,
                values.len()
            ),
        });
    }
    for (k, &(p, n)) in indices.iter().enumerate() {
        let want = (k / cols, k % cols);
        if (p, n) != want {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line: k + 2,
                message: format!(
                    "indices must be dense row-major: expected ({},{}), found ({p},{n})",
                    want.0, want.1
                ),
            });
        }
    }
    Ok(RealMatrix::from_vec(rows, cols, values).expect("length checked above"))
}

// ---------------------------------------------------------------------------
// Residual traces and digests
// ---------------------------------------------------------------------------

/// Write a residual trace (`iter,eps`).
pub fn write_trace(path: &Path, trace: &[f64]) -> Result<(), IoError> {
    let mut out = String::from("iter,eps\n");
    for (i, eps) in trace.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(*eps)));
    }
    write_atomic(path, &out)
}

/// SHA-256 digest of a file, hex-encoded.
pub fn file_digest(path: &Path) -> Result<String, IoError> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path).map_err(io_err(path))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
