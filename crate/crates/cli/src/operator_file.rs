//! Operator files: `{"p": 3, "weights": [1, 1], "field": "real", "matrix": [[0, -1], [1, 0]]}`.
//!
//! Complex matrices hold `[re, im]` pairs.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use numindex_core::{Field, LpSpace, Operator, Vector};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperatorFile {
    p: f64,
    weights: Vec<f64>,
    field: Field,
    matrix: Vec<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub struct OperatorFile {
    pub space: LpSpace,
    pub operator: Operator,
}

fn real_entry(v: &Value, at: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| anyhow!("{at}: expected a number, found {v}"))?;
    if !x.is_finite() {
        bail!("{at}: entry must be finite");
    }
    Ok(x)
}

fn complex_entry(v: &Value, at: &str) -> Result<Complex64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Complex64::new(
            real_entry(re, &format!("{at}[0]"))?,
            real_entry(im, &format!("{at}[1]"))?,
        )),
        _ => bail!("{at}: expected a [re, im] pair, found {v}"),
    }
}

pub fn parse(text: &str) -> Result<OperatorFile> {
    let raw: RawOperatorFile =
        serde_json::from_str(text).map_err(|e| anyhow!("line {}, column {}: {e}", e.line(), e.column()))?;
    if let Some(i) = raw.weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        bail!(
            "weights[{i}]: weight must be a positive finite number, found {}",
            raw.weights[i]
        );
    }
    let space = LpSpace::new(raw.p, raw.weights).map_err(|e| anyhow!("p: {e}"))?;
    let m = space.m();
    if raw.matrix.len() != m {
        bail!("matrix: expected {m} rows to match weights, found {}", raw.matrix.len());
    }
    if let Some((i, row)) = raw.matrix.iter().enumerate().find(|(_, r)| r.len() != m) {
        bail!("matrix[{i}]: expected {m} entries, found {}", row.len());
    }
    let at = |i: usize, k: usize| format!("matrix[{i}][{k}]");
    let operator = match raw.field {
        Field::Real => Operator::real(
            raw.matrix
                .iter()
                .enumerate()
                .map(|(i, row)| row.iter().enumerate().map(|(k, v)| real_entry(v, &at(i, k))).collect())
                .collect::<Result<_>>()?,
        ),
        Field::Complex => Operator::complex(
            raw.matrix
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(k, v)| complex_entry(v, &at(i, k)))
                        .collect()
                })
                .collect::<Result<_>>()?,
        ),
    }
    .map_err(|e| anyhow!("matrix: {e}"))?;
    Ok(OperatorFile { space, operator })
}

pub fn load(path: &Path) -> Result<OperatorFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

/// A witness file: a JSON array of real numbers.
pub fn load_real_vector(path: &Path, m: usize) -> Result<Vector> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))?;
    if v.len() != m {
        bail!("{}: expected {m} entries, found {}", path.display(), v.len());
    }
    Ok(Vector::Real(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_and_complex() {
        let r = parse(r#"{"p": 3, "weights": [1, 1], "field": "real", "matrix": [[0, -1], [1, 0]]}"#).unwrap();
        assert_eq!(r.operator, Operator::rotation());
        let c = parse(r#"{"p": 2, "weights": [1], "field": "complex", "matrix": [[[0, 1]]]}"#).unwrap();
        assert_eq!(c.operator.entry(0, 0), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let cases = [
            (r#"{"p": 1, "weights": [1], "field": "real", "matrix": [[1]]}"#, "p:"),
            (
                r#"{"p": 3, "weights": [1, -2], "field": "real", "matrix": [[1, 0], [0, 1]]}"#,
                "weights[1]",
            ),
            (
                r#"{"p": 3, "weights": [1, 1], "field": "real", "matrix": [[1, 0], [0]]}"#,
                "matrix[1]",
            ),
            (
                r#"{"p": 3, "weights": [1], "field": "real", "matrix": [["x"]]}"#,
                "matrix[0][0]",
            ),
            (
                r#"{"p": 3, "weights": [1], "field": "complex", "matrix": [[1]]}"#,
                "matrix[0][0]",
            ),
            ("{\n\"p\": 3,\n\"weights\": [1],,\n}", "line 3"),
            (
                r#"{"p": 3, "weights": [1], "field": "quaternion", "matrix": [[1]]}"#,
                "line 1",
            ),
        ];
        for (text, needle) in cases {
            let msg = format!("{:#}", parse(text).unwrap_err());
            assert!(msg.contains(needle), "{msg} lacks {needle}");
        }
    }
}
