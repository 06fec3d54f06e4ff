//! `ChannelDoc`, the JSON exchange format for CP maps.
//!
//! ```json
//! {"dim_in": 2, "dim_out": 2, "repr": "choi", "data": [[[1, 0], ...], ...], "name": "id"}
//! ```
//!
//! `choi` data is the `(dim_in·dim_out)²` Choi matrix as rows of `[re, im]`
//! pairs. `kraus` data is a list of `dim_out × dim_in` operators in the same
//! row layout. Floats are written with 17 significant digits, which
//! round-trips every finite `f64` exactly.

use std::fs;
use std::path::Path;

use cpmean_core::cpmaps::CpMap;
use cpmean_core::hermlinalg::{c64, CMatrix};
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Repr {
    Choi,
    Kraus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub dim_in: usize,
    pub dim_out: usize,
    pub repr: Repr,
    pub data: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Error)]
pub enum DocError {
    #[error("{0}")]
    Malformed(String),
    #[error(transparent)]
    Core(#[from] cpmean_core::Error),
}

/// `x` as a JSON number with 17 significant digits.
pub fn number(x: f64) -> Value {
    assert!(x.is_finite(), "non-finite value {x} cannot be serialized");
    Value::Number(format!("{x:.16e}").parse::<Number>().expect("formatted float parses"))
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols()).map(|j| Value::Array(vec![number(m[(i, j)].re), number(m[(i, j)].im)])).collect(),
                )
            })
            .collect(),
    )
}

fn parse_matrix(v: &Value, rows: usize, cols: usize, what: &str) -> std::result::Result<CMatrix, DocError> {
    let bad = |msg: String| DocError::Malformed(format!("{what}: {msg}"));
    let row_list = v.as_array().ok_or_else(|| bad("expected an array of rows".into()))?;
    if row_list.len() != rows {
        return Err(bad(format!("expected {rows} rows, found {}", row_list.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in row_list.iter().enumerate() {
        let entries = row.as_array().ok_or_else(|| bad(format!("row {i} is not an array")))?;
        if entries.len() != cols {
            return Err(bad(format!("row {i} has {} entries, expected {cols}", entries.len())));
        }
        for (j, z) in entries.iter().enumerate() {
            let pair = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| bad(format!("entry ({i}, {j}) is not an [re, im] pair")))?;
            let part = |k: usize| {
                pair[k]
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(format!("entry ({i}, {j}) has a non-numeric or non-finite part")))
            };
            m[(i, j)] = c64(part(0)?, part(1)?);
        }
    }
    Ok(m)
}

impl ChannelDoc {
    /// Choi representation of `map`.
    pub fn from_map(map: &CpMap, name: Option<String>) -> Self {
        Self {
            dim_in: map.dim_in(),
            dim_out: map.dim_out(),
            repr: Repr::Choi,
            data: matrix_value(map.choi().matrix()),
            name,
        }
    }

    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: &[CMatrix], name: Option<String>) -> Self {
        Self { dim_in, dim_out, repr: Repr::Kraus, data: Value::Array(kraus.iter().map(matrix_value).collect()), name }
    }

    pub fn to_map(&self) -> std::result::Result<CpMap, DocError> {
        let (m, n) = (self.dim_in, self.dim_out);
        if m == 0 || n == 0 {
            return Err(DocError::Malformed(format!("dimensions must be positive, got {m}→{n}")));
        }
        match self.repr {
            Repr::Choi => {
                let d = m.checked_mul(n).ok_or_else(|| DocError::Malformed("dimensions overflow".into()))?;
                let c = parse_matrix(&self.data, d, d, "Choi matrix")?;
                Ok(CpMap::from_choi(m, n, c)?)
            }
            Repr::Kraus => {
                let ops = self
                    .data
                    .as_array()
                    .ok_or_else(|| DocError::Malformed("Kraus data must be an array of operators".into()))?;
                if ops.is_empty() {
                    return Err(DocError::Malformed("Kraus list is empty".into()));
                }
                let kraus = ops
                    .iter()
                    .enumerate()
                    .map(|(k, op)| parse_matrix(op, n, m, &format!("Kraus operator {k}")))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(CpMap::from_kraus(m, n, kraus)?)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

/// Hex SHA-256 of a byte string.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A channel read from disk together with the digest of its bytes.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub map: CpMap,
    pub name: Option<String>,
    pub sha256: String,
}

pub fn load_channel(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    let parse = |message: String| CliError::Parse { path: path.to_owned(), message };
    let text = std::str::from_utf8(&bytes).map_err(|e| parse(e.to_string()))?;
    let doc: ChannelDoc = serde_json::from_str(text).map_err(|e| parse(e.to_string()))?;
    let map = doc.to_map().map_err(|e| match e {
        DocError::Malformed(message) => parse(message),
        DocError::Core(core) => CliError::Core(core),
    })?;
    Ok(Loaded { map, name: doc.name, sha256: digest(&bytes) })
}

pub fn save_channel(map: &CpMap, path: &Path, name: Option<String>) -> Result<()> {
    let text = ChannelDoc::from_map(map, name).to_json();
    fs::write(path, text + "\n").map_err(|source| CliError::Write { path: path.to_owned(), source })
}
