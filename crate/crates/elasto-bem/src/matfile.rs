//! Dense matrix files.
//!
//! Binary layout, little endian: the 8 bytes `EBEMMAT1`, `u64` rows, `u64`
//! columns, `u64` element flag (`1` = complex128), then `rows × cols` pairs
//! of `f64` (re, im) in row-major order. A JSON sidecar with the same stem
//! and extension `json` holds the space descriptors and conventions.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use elasto_bem_core::dense::{DenseOperator, Side};
use elasto_bem_core::space::SpaceDesc;
use elasto_bem_core::C64;
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 8] = b"EBEMMAT1";
pub const COMPLEX128: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum MatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a matrix file (bad magic)")]
    BadMagic,
    #[error("unsupported element flag {0}")]
    Flag(u64),
    #[error("file holds {got} bytes of data, expected {expected}")]
    Truncated { expected: u64, got: u64 },
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

/// Text companion of a matrix file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub rows: u64,
    pub cols: u64,
    pub trial_space: String,
    pub trial_components: usize,
    pub test_space: String,
    pub test_components: usize,
    pub operator: String,
    pub kernel: String,
    /// `"interior"`, `"exterior"` or `null` for two-sided operators.
    pub side: Option<String>,
    pub layout: String,
}

impl Sidecar {
    pub fn of(op: &DenseOperator) -> Self {
        let name = |d: &SpaceDesc| format!("{:?}", d.space);
        Sidecar {
            format: "EBEMMAT1".into(),
            rows: op.rows as u64,
            cols: op.cols as u64,
            trial_space: name(&op.trial),
            trial_components: op.trial.components,
            test_space: name(&op.test),
            test_components: op.test.components,
            operator: op.convention.operator.clone(),
            kernel: op.convention.kernel.clone(),
            side: op.convention.side.map(|s: Side| s.name().to_string()),
            layout: "row-major, rows = test space, component-major blocks".into(),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> MatError + '_ {
    move |source| MatError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn encode(rows: usize, cols: usize, data: &[C64]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(32 + 16 * data.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(rows as u64).to_le_bytes());
    buf.extend_from_slice(&(cols as u64).to_le_bytes());
    buf.extend_from_slice(&COMPLEX128.to_le_bytes());
    for v in data {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    buf
}

/// Rows, columns and row-major entries.
pub fn decode(bytes: &[u8]) -> Result<(usize, usize, Vec<C64>), MatError> {
    if bytes.len() < 32 || &bytes[..8] != MAGIC {
        return Err(MatError::BadMagic);
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
    let (rows, cols, flag) = (word(1), word(2), word(3));
    if flag != COMPLEX128 {
        return Err(MatError::Flag(flag));
    }
    let expected = rows.saturating_mul(cols).saturating_mul(16);
    let got = (bytes.len() - 32) as u64;
    if got != expected {
        return Err(MatError::Truncated { expected, got });
    }
    let data = bytes[32..]
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((rows as usize, cols as usize, data))
}

/// Writes the binary file and its sidecar.
pub fn write_matrix(path: &Path, op: &DenseOperator) -> Result<(), MatError> {
    let mut f = std::fs::File::create(path).map_err(io(path))?;
    f.write_all(&encode(op.rows, op.cols, &op.data)).map_err(io(path))?;
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&Sidecar::of(op))?;
    std::fs::write(&side, text + "\n").map_err(io(&side))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<C64>), MatError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io(path))?;
    decode(&bytes)
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar, MatError> {
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(io(&side))?;
    Ok(serde_json::from_str(&text)?)
}
