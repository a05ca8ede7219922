use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One stream observation in the normalized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub values: Vec<f64>,
    /// Ground-truth class, consulted only by the evaluation code.
    pub label: Option<String>,
    /// Arrival index.
    pub seq: u64,
}

impl Point {
    pub fn new(values: Vec<f64>, seq: u64) -> Self {
        Point {
            values,
            label: None,
            seq,
        }
    }

    pub fn labeled(values: Vec<f64>, label: impl Into<String>, seq: u64) -> Self {
        Point {
            values,
            label: Some(label.into()),
            seq,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Fails on a wrong dimensionality or any NaN / infinite entry.
    pub fn check(&self, dim: usize) -> Result<()> {
        check_values(&self.values, dim)
    }
}

pub(crate) fn check_dim(values: &[f64], dim: usize) -> Result<()> {
    if values.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: values.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_values(values: &[f64], dim: usize) -> Result<()> {
    check_dim(values, dim)?;
    match values.iter().position(|v| !v.is_finite()) {
        Some(dim) => Err(Error::NonFinite { dim }),
        None => Ok(()),
    }
}
