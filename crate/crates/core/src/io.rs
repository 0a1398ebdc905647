//! JSON file formats.
//!
//! Complex numbers are written as `[re, im]` pairs. A matrix is either a
//! nested list of rows or a flat row-major list of pairs:
//!
//! ```json
//! {"dim_in": 2, "dim_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::DensityMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonMatrix {
    Nested(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl JsonMatrix {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        JsonMatrix::Nested(
            (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        )
    }

    /// Converts with an expected shape.
    pub fn to_matrix(&self, rows: usize, cols: usize) -> Result<ComplexMatrix> {
        let flat: Vec<[f64; 2]> = match self {
            JsonMatrix::Nested(data) => {
                if data.len() != rows || data.iter().any(|r| r.len() != cols) {
                    return Err(Error::DimensionMismatch(format!(
                        "expected a {rows}×{cols} matrix, got {} rows of lengths {:?}",
                        data.len(),
                        data.iter().map(Vec::len).collect::<Vec<_>>()
                    )));
                }
                data.concat()
            }
            JsonMatrix::Flat(data) => {
                if data.len() != rows * cols {
                    return Err(Error::DimensionMismatch(format!(
                        "expected {} flat entries for a {rows}×{cols} matrix, got {}",
                        rows * cols,
                        data.len()
                    )));
                }
                data.clone()
            }
        };
        ComplexMatrix::new(rows, cols, flat.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }

    /// Converts using the shape of a nested matrix, or a square shape for a
    /// flat one.
    pub fn to_matrix_auto(&self) -> Result<ComplexMatrix> {
        match self {
            JsonMatrix::Nested(data) => {
                let cols = data.first().map_or(0, Vec::len);
                self.to_matrix(data.len(), cols)
            }
            JsonMatrix::Flat(data) => {
                let n = (data.len() as f64).sqrt().round() as usize;
                if n * n != data.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "flat matrix of {} entries is not square",
                        data.len()
                    )));
                }
                self.to_matrix(n, n)
            }
        }
    }
}

/// Kraus channel file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<JsonMatrix>,
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.kraus().iter().map(JsonMatrix::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| k.to_matrix(self.dim_out, self.dim_in))
            .collect::<Result<_>>()?;
        KrausChannel::new(self.dim_in, self.dim_out, kraus)
    }
}

/// Density-matrix file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub dim: usize,
    pub matrix: JsonMatrix,
}

impl DensityFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dim: rho.dim(),
            matrix: JsonMatrix::from_matrix(rho.matrix()),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.to_matrix(self.dim, self.dim)?)
    }
}

/// Deserializes JSON text, reporting the failing field path and position.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_channel(text: &str) -> Result<KrausChannel> {
    from_json_str::<ChannelFile>(text)?.to_channel()
}

pub fn load_channel(path: &Path) -> Result<KrausChannel> {
    parse_channel(&read_text(path)?)
}

pub fn channel_to_json(ch: &KrausChannel) -> Result<String> {
    to_json_pretty(&ChannelFile::from_channel(ch))
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    from_json_str::<DensityFile>(text)?.to_density()
}

pub fn load_density(path: &Path) -> Result<DensityMatrix> {
    parse_density(&read_text(path)?)
}

pub fn density_to_json(rho: &DensityMatrix) -> Result<String> {
    to_json_pretty(&DensityFile::from_density(rho))
}
