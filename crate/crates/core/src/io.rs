//! File formats: coefficient JSON, dense-complex matrix blocks, checkpoint
//! sidecars.
//!
//! Coefficients travel as `{"L_max": n, "coeffs": [[l, m, re, im], ...]}`;
//! matrices as a one-line JSON header `{"N": n, "format": "dense-complex"}`
//! followed by a row-major little-endian block of f64 (re, im) pairs.

use crate::error::{CoreError, Result};
use crate::quant::SkewHermitianMatrix;
use crate::sphere::BandlimitedFunction;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CoeffFile {
    #[serde(rename = "L_max")]
    pub l_max: usize,
    pub coeffs: Vec<(usize, i64, f64, f64)>,
}

impl From<&BandlimitedFunction> for CoeffFile {
    fn from(f: &BandlimitedFunction) -> Self {
        let coeffs = f
            .iter()
            .filter(|(_, _, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(l, m, c)| (l, m, c.re, c.im))
            .collect();
        CoeffFile {
            l_max: f.l_max(),
            coeffs,
        }
    }
}

impl TryFrom<&CoeffFile> for BandlimitedFunction {
    type Error = CoreError;
    fn try_from(file: &CoeffFile) -> Result<BandlimitedFunction> {
        let mut f = BandlimitedFunction::zeros(file.l_max);
        for &(l, m, re, im) in &file.coeffs {
            if l > file.l_max || m.unsigned_abs() as usize > l {
                return Err(CoreError::Input(format!(
                    "coefficient entry ({l},{m}) outside L_max {}",
                    file.l_max
                )));
            }
            *f.at_mut(l, m) = Complex64::new(re, im);
        }
        Ok(f)
    }
}

pub fn write_coeffs(path: &Path, f: &BandlimitedFunction) -> Result<()> {
    let file = CoeffFile::from(f);
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| CoreError::Input(format!("serialize: {e}")))?;
    std::fs::write(path, text).map_err(|e| CoreError::Input(format!("write {path:?}: {e}")))
}

pub fn read_coeffs(path: &Path) -> Result<BandlimitedFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Input(format!("read {path:?}: {e}")))?;
    let file: CoeffFile = serde_json::from_str(&text)
        .map_err(|e| CoreError::Input(format!("parse {path:?}: {e}")))?;
    BandlimitedFunction::try_from(&file)
}

#[derive(Serialize, Deserialize)]
struct MatrixHeader {
    #[serde(rename = "N")]
    n: usize,
    format: String,
}

pub fn write_matrix(path: &Path, mat: &DMatrix<Complex64>) -> Result<()> {
    let header = MatrixHeader {
        n: mat.nrows(),
        format: "dense-complex".into(),
    };
    let mut out = Vec::new();
    serde_json::to_writer(&mut out, &header).map_err(|e| CoreError::Input(e.to_string()))?;
    out.push(b'\n');
    for r in 0..mat.nrows() {
        for c in 0..mat.ncols() {
            let v = mat[(r, c)];
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| CoreError::Input(format!("write {path:?}: {e}")))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<Complex64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CoreError::Input(format!("read {path:?}: {e}")))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CoreError::Input("missing matrix header line".into()))?;
    let header: MatrixHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| CoreError::Input(format!("matrix header: {e}")))?;
    if header.format != "dense-complex" {
        return Err(CoreError::Input(format!(
            "unknown matrix format '{}'",
            header.format
        )));
    }
    let n = header.n;
    let body = &bytes[newline + 1..];
    if body.len() != n * n * 16 {
        return Err(CoreError::Input(format!(
            "matrix body has {} bytes, expected {}",
            body.len(),
            n * n * 16
        )));
    }
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let off = (r * n + c) * 16;
            let re = f64::from_le_bytes(body[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(body[off + 8..off + 16].try_into().unwrap());
            mat[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(mat)
}

/// Sidecar for trajectory checkpoints.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CheckpointMeta {
    pub t: f64,
    pub dt: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub diagnostics: serde_json::Map<String, serde_json::Value>,
}

pub fn write_checkpoint(
    dir: &Path,
    stem: &str,
    w: &SkewHermitianMatrix,
    meta: &CheckpointMeta,
) -> Result<()> {
    write_matrix(&dir.join(format!("{stem}.mat")), w.mat())?;
    let text = serde_json::to_string_pretty(meta).map_err(|e| CoreError::Input(e.to_string()))?;
    std::fs::write(dir.join(format!("{stem}.json")), text)
        .map_err(|e| CoreError::Input(format!("write sidecar: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coeff_roundtrip() {
        let f = crate::rng::random_real_bandlimited(5, 3);
        let dir = std::env::temp_dir().join("zeitlin-core-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("omega.json");
        write_coeffs(&path, &f).unwrap();
        let back = read_coeffs(&path).unwrap();
        assert_eq!(f.coeffs(), back.coeffs());
    }

    #[test]
    fn matrix_roundtrip() {
        let a = crate::rng::random_su_matrix(9, 6);
        let dir = std::env::temp_dir().join("zeitlin-core-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.mat");
        write_matrix(&path, a.mat()).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(a.mat(), &back);
    }

    #[test]
    fn malformed_coeff_entry_is_rejected() {
        let file = CoeffFile {
            l_max: 2,
            coeffs: vec![(3, 0, 1.0, 0.0)],
        };
        assert!(BandlimitedFunction::try_from(&file).is_err());
    }
}
