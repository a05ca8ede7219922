//! KDD Cup 1999 connection records.
//!
//! A record line holds 41 comma-separated attributes followed by the class
//! label (`normal.`, `smurf.`, ...). Seven attributes are symbolic
//! (`protocol_type`, `service`, `flag`, `land`, `logged_in`,
//! `is_host_login`, `is_guest_login`); the remaining ones are the continuous
//! feature space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute names in file order.
pub const ATTRIBUTES: [&str; 41] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// Zero-based indices of the symbolic attributes.
pub const SYMBOLIC_COLUMNS: [usize; 7] = [1, 2, 3, 6, 11, 20, 21];

/// Zero-based indices of the continuous attributes, in feature order.
pub const CONTINUOUS_COLUMNS: [usize; 34] = [
    0, 4, 5, 7, 8, 9, 10, 12, 13, 14, 15, 16, 17, 18, 19, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31,
    32, 33, 34, 35, 36, 37, 38, 39, 40,
];

pub const NUM_ATTRIBUTES: usize = ATTRIBUTES.len();

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    /// All attributes as they appear in the line.
    pub fields: Vec<String>,
    pub label: String,
    /// The continuous attributes, parsed.
    pub continuous: Vec<f64>,
}

/// Splits and validates one record line. `line_no` is 1-based and only used
/// in error messages.
pub fn parse_kdd_record(line: &str, line_no: usize) -> Result<RawRecord> {
    let line = line.trim_end_matches(['\r', '\n']);
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != NUM_ATTRIBUTES + 1 {
        return Err(Error::Record {
            line: line_no,
            reason: format!(
                "expected {} fields ({} attributes + label), found {}",
                NUM_ATTRIBUTES + 1,
                NUM_ATTRIBUTES,
                parts.len()
            ),
        });
    }
    let label = parts[NUM_ATTRIBUTES].trim();
    if label.is_empty() {
        return Err(Error::Record {
            line: line_no,
            reason: "empty label".into(),
        });
    }
    let continuous = CONTINUOUS_COLUMNS
        .iter()
        .map(|&c| {
            let raw = parts[c].trim();
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Record {
                    line: line_no,
                    reason: format!("{} = {raw:?} is not a finite number", ATTRIBUTES[c]),
                }),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RawRecord {
        fields: parts[..NUM_ATTRIBUTES]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        label: label.to_owned(),
        continuous,
    })
}

/// Per-dimension min-max scaling fitted on the initialization prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(rows: &[&[f64]]) -> Result<Self> {
        let first = rows.first().ok_or(Error::NotEnoughRecords {
            needed: 1,
            found: 0,
        })?;
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for row in &rows[1..] {
            crate::point::check_dim(row, min.len())?;
            for (j, &x) in row.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        Ok(Normalizer { min, max })
    }

    /// `(x - min) / (max - min)` clamped to `[0, 1]`; constant dimensions map to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let range = self.max[j] - self.min[j];
                if range > 0.0 {
                    ((v - self.min[j]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Fits a [`Normalizer`] on the continuous attributes of `buffer`.
pub fn fit_normalizer(buffer: &[RawRecord]) -> Result<Normalizer> {
    let rows: Vec<&[f64]> = buffer.iter().map(|r| r.continuous.as_slice()).collect();
    Normalizer::fit(&rows)
}
