//! JSON on-disk format for matrix sets and result records.
//!
//! A matrix entry is either a real number or a two-element `[re, im]`
//! pair. Weights are normalized on load (with a flag when their sum was
//! off by more than 1e-9); every matrix must be PD after symmetrization,
//! and load errors name the offending index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::divergence::WeightVector;
use crate::matcore::{HermitianMatrix, PDMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> Complex64 {
        match self {
            Entry::Real(v) => Complex64::new(*v, 0.0),
            Entry::Complex([re, im]) => Complex64::new(*re, *im),
        }
    }
}

/// On-disk representation of the input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSetFile {
    pub matrices: Vec<Vec<Vec<Entry>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// A parsed and validated matrix set.
#[derive(Debug, Clone)]
pub struct MatrixSet {
    pub matrices: Vec<PDMatrix>,
    pub weights: Option<WeightVector>,
    pub mean: Option<String>,
    pub alpha: Option<f64>,
    /// True when any input entry used the `[re, im]` encoding; output
    /// echoes the same style.
    pub complex_encoded: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("matrix {index} is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        index: usize,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("file contains no matrices")]
    Empty,
    #[error("matrix {index} is {got}x{got} but matrix 0 is {expected}x{expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix {index} is not positive definite: {source}")]
    NotPositiveDefinite {
        index: usize,
        source: crate::error::OpMeanError,
    },
    #[error("weights: {0}")]
    Weights(String),
}

pub fn parse_set(file: &MatrixSetFile) -> Result<MatrixSet, LoadError> {
    if file.matrices.is_empty() {
        return Err(LoadError::Empty);
    }
    let mut complex_encoded = false;
    let mut matrices = Vec::with_capacity(file.matrices.len());
    let dim0 = file.matrices[0].len();
    for (index, rows) in file.matrices.iter().enumerate() {
        let n = rows.len();
        if n != dim0 {
            return Err(LoadError::DimensionMismatch {
                index,
                got: n,
                expected: dim0,
            });
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LoadError::NotSquare {
                    index,
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
            for (j, e) in row.iter().enumerate() {
                if matches!(e, Entry::Complex(_)) {
                    complex_encoded = true;
                }
                m[(i, j)] = e.value();
            }
        }
        let herm = HermitianMatrix::new(m).map_err(|source| LoadError::NotPositiveDefinite {
            index,
            source,
        })?;
        let pd = PDMatrix::new(herm)
            .map_err(|source| LoadError::NotPositiveDefinite { index, source })?;
        matrices.push(pd);
    }
    let weights = match &file.weights {
        Some(w) => {
            if w.len() != matrices.len() {
                return Err(LoadError::Weights(format!(
                    "{} weights for {} matrices",
                    w.len(),
                    matrices.len()
                )));
            }
            Some(WeightVector::new(w.clone()).map_err(|e| LoadError::Weights(e.to_string()))?)
        }
        None => None,
    };
    Ok(MatrixSet {
        matrices,
        weights,
        mean: file.mean.clone(),
        alpha: file.alpha,
        complex_encoded,
    })
}

pub fn load_set(path: &str) -> Result<MatrixSet, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.into(),
        source,
    })?;
    let file: MatrixSetFile = serde_json::from_str(&text)?;
    parse_set(&file)
}

/// Serializes a Hermitian matrix back to the file encoding: `[re, im]`
/// pairs when the input used them or the matrix has imaginary parts,
/// plain numbers otherwise.
pub fn matrix_to_value(m: &HermitianMatrix, complex_encoded: bool) -> Value {
    let n = m.dim();
    let needs_complex = complex_encoded
        || (0..n).any(|i| (0..n).any(|j| m.matrix()[(i, j)].im != 0.0));
    let rows: Vec<Value> = (0..n)
        .map(|i| {
            let row: Vec<Value> = (0..n)
                .map(|j| {
                    let e = m.matrix()[(i, j)];
                    if needs_complex {
                        serde_json::json!([e.re, e.im])
                    } else {
                        serde_json::json!(e.re)
                    }
                })
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

/// The machine-readable output record printed by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub op: String,
    pub inputs: Value,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

impl ResultRecord {
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}
