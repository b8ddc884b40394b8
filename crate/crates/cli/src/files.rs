//! System and design description files (TOML with named matrices).
//!
//! A system file holds the plant and target matrices as lists of rows:
//!
//! ```toml
//! A = [[0.0, 1.0], [0.0, 0.0]]
//! B = [[0.0], [1.0]]
//! F = [[1.0, 0.0]]    # optional; defaults to C
//! C = [[1.0, 0.0]]    # optional
//! R = [[0.0, 1.0]]    # optional caller-provided augmentation
//! ```
//!
//! A design file holds the gain, the augmentation it was built against and
//! the requested poles (reals, or `[re, im]` pairs):
//!
//! ```toml
//! Z = [[0.75], [0.75]]
//! poles = [-2.0]
//! ```

use serde::{Deserialize, Serialize};
use target_control::{Complex64, DMatrix};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

/// One requested pole: a real number, or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoleEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl From<PoleEntry> for Complex64 {
    fn from(entry: PoleEntry) -> Self {
        match entry {
            PoleEntry::Real(re) => Complex64::new(re, 0.0),
            PoleEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for PoleEntry {
    fn from(value: Complex64) -> Self {
        if value.im == 0.0 {
            PoleEntry::Real(value.re)
        } else {
            PoleEntry::Pair([value.re, value.im])
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    #[serde(rename = "Z")]
    pub z: Vec<Vec<f64>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
    pub poles: Vec<PoleEntry>,
}

/// Converts a row-list into a matrix, naming the matrix and the offending
/// row on failure.
pub fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Input(format!("matrix {name} is empty")));
    }
    let cols = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::Input(format!(
                "matrix {name} row {} has {} entries, expected {cols}",
                i + 1,
                row.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Input(format!(
                "matrix {name} row {} contains a non-finite entry ({v})",
                i + 1
            )));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("system file: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    #[allow(dead_code)] // round-trip surface, exercised by tests
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("system files serialize to TOML")
    }
}

impl DesignFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("design file: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("design files serialize to TOML")
    }
}

/// Parses one pole token: `-2`, `1.5`, `-1+2i`, `-1-2i`, `3i`, `-i`.
pub fn parse_complex_token(token: &str) -> Result<Complex64, CliError> {
    let compact: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(CliError::Input("empty pole token".into()));
    }
    if let Ok(re) = compact.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let body = compact
        .strip_suffix(['i', 'j'])
        .ok_or_else(|| CliError::Input(format!("cannot parse pole '{token}'")))?;
    // Split re and im at the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in 1..bytes.len() {
        if (bytes[idx] == b'+' || bytes[idx] == b'-')
            && bytes[idx - 1] != b'e'
            && bytes[idx - 1] != b'E'
        {
            split = Some(idx);
        }
    }
    let (re_str, im_str) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("0", body),
    };
    let re: f64 = re_str
        .parse()
        .map_err(|_| CliError::Input(format!("cannot parse pole '{token}'")))?;
    let im: f64 = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse pole '{token}'")))?,
    };
    Ok(Complex64::new(re, im))
}

/// Parses a comma-separated pole list.
pub fn parse_pole_list(list: &str) -> Result<Vec<Complex64>, CliError> {
    list.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_complex_token)
        .collect()
}

/// Parses a comma-separated vector of reals.
pub fn parse_vector(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("cannot parse number '{t}'")))
        })
        .collect()
}
