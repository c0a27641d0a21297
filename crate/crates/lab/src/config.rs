//! Run configurations. Every sweep command resolves its CLI flags and an
//! optional `--config` JSON into one of these structs; the resolved struct
//! (with generated inputs embedded) is what lands in the manifest, so a
//! manifest is itself a valid `--config` for a bit-identical rerun.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use zeitlin_core::io::CoeffFile;

pub const DEFAULT_N_LIST: [usize; 5] = [8, 16, 32, 64, 128];

fn default_n_list() -> Vec<usize> {
    DEFAULT_N_LIST.to_vec()
}

fn default_seed() -> u64 {
    42
}

fn default_l_max() -> usize {
    3
}

fn default_slope_hbar() -> f64 {
    0.9
}

fn default_slope_inv_n2() -> f64 {
    1.8
}

fn default_ratio_spread() -> f64 {
    3.0
}

fn default_pairs() -> usize {
    3
}

fn default_scheme() -> String {
    "rk4".into()
}

fn default_t_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_jacobi_n_list() -> Vec<usize> {
    vec![8, 16, 32, 64]
}

fn default_triples() -> usize {
    10
}

fn default_verify_n() -> usize {
    16
}

fn default_simulate_n() -> usize {
    32
}

fn default_t_final() -> f64 {
    10.0
}

fn default_dt() -> f64 {
    1e-2
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSweepConfig {
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_slope_hbar")]
    pub slope_threshold: f64,
    /// explicit test plane; overrides the seeded pairs when present
    #[serde(default)]
    pub f: Option<CoeffFile>,
    #[serde(default)]
    pub g: Option<CoeffFile>,
}

impl Default for CurvatureSweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct JacobiSweepConfig {
    #[serde(default = "default_jacobi_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_slope_hbar")]
    pub slope_threshold: f64,
    /// fit slope at this grid time
    #[serde(default = "default_fit_time")]
    pub fit_time: f64,
    #[serde(default)]
    pub omega: Option<CoeffFile>,
    #[serde(default)]
    pub upsilon: Option<CoeffFile>,
    #[serde(default)]
    pub zeta: Option<CoeffFile>,
}

fn default_fit_time() -> f64 {
    1.0
}

impl Default for JacobiSweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct BracketSweepConfig {
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_ratio_spread")]
    pub ratio_spread_threshold: f64,
    /// Sobolev exponent for the norm-convergence tail bound
    #[serde(default = "default_tail_s")]
    pub tail_s: f64,
    #[serde(default)]
    pub f: Option<CoeffFile>,
    #[serde(default)]
    pub g: Option<CoeffFile>,
}

fn default_tail_s() -> f64 {
    2.0
}

impl Default for BracketSweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct StructureSweepConfig {
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_triples")]
    pub triples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_slope_inv_n2")]
    pub slope_threshold: f64,
    /// N at which the Milnor cross-check runs
    #[serde(default = "default_verify_n")]
    pub milnor_n: usize,
}

impl Default for StructureSweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_simulate_n")]
    pub n: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    /// zonal-l2 | band-l2 | random; ignored when omega is present
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub omega: Option<CoeffFile>,
    /// write a matrix checkpoint every this many steps (0 = endpoints only)
    #[serde(default)]
    pub checkpoint_every: usize,
    /// reconstruct the SU(N) flow map alongside the vorticity
    #[serde(default)]
    pub reconstruct: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_n")]
    pub n: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

/// Shared validation: strictly increasing N-list, every N beyond the band
/// limits of the inputs.
pub fn validate_n_list(n_list: &[usize], min_exceed: usize) -> Result<(), String> {
    if n_list.is_empty() {
        return Err("n_list must not be empty".into());
    }
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!(
            "n_list must be strictly increasing, got {n_list:?}"
        ));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n <= min_exceed) {
        return Err(format!(
            "every N must exceed the input band limit {min_exceed}, got N = {bad}"
        ));
    }
    Ok(())
}

/// Resolve the output directory: flag, else ZEITLIN_LAB_OUT, else ./out.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ZEITLIN_LAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn load_config<T: for<'de> Deserialize<'de> + Default>(
    path: Option<&PathBuf>,
) -> Result<T, String> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("read {p:?}: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("parse {p:?}: {e}"))
        }
    }
}
