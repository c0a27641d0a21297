//! Convergence rows and log–log rate fitting.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// One sweep cell: N, the recomputed ħ_N, and one error per tracked column.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub hbar: f64,
    pub errors: Vec<f64>,
}

/// Ordinary least-squares fit of log(err) against log(x).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// rows dropped because their error was exactly zero (or negative)
    pub excluded_rows: usize,
}

/// Fit err ≈ C·x^slope from (x, err) pairs; zero-error rows are excluded and
/// counted. Needs at least 3 usable rows.
pub fn fit_convergence_rate(xs: &[f64], errs: &[f64]) -> Result<RateFit> {
    assert_eq!(xs.len(), errs.len());
    let usable: Vec<(f64, f64)> = xs
        .iter()
        .zip(errs.iter())
        .filter(|&(&x, &e)| x > 0.0 && e > 0.0)
        .map(|(&x, &e)| (x.ln(), e.ln()))
        .collect();
    let excluded = xs.len() - usable.len();
    if usable.len() < 3 {
        return Err(CoreError::InsufficientData(format!(
            "need at least 3 positive-error rows for a rate fit, have {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(CoreError::InsufficientData("degenerate abscissae".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = usable.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        excluded_rows: excluded,
    })
}

/// Convenience: fit an error column of convergence rows against ħ_N.
pub fn fit_rows(rows: &[ConvergenceRow], column: usize) -> Result<RateFit> {
    let xs: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.errors[column]).collect();
    fit_convergence_rate(&xs, &errs)
}
