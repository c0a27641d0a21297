//! Drivers for the sweep subcommands: each resolves its config, runs the
//! experiment, writes rows.csv + summary.json + manifest.json into the
//! output directory, and reports whether every configured threshold passed.

use crate::config::*;
use crate::emit::{fmt_f64, write_csv, write_json, EmitError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use zeitlin_core::curvature::{
    curvature_convergence_sweep, sectional_curvature_cont, sectional_curvature_cont_normalized,
    sectional_curvature_milnor_cont, sectional_curvature_milnor_quant, sectional_curvature_quant,
    RealBasisIndex,
};
use zeitlin_core::dynamics::{
    casimir_n, hamiltonian_n, reconstruct_flow, ZeitlinIntegrator, ZeitlinState,
};
use zeitlin_core::error::CoreError;
use zeitlin_core::io::CoeffFile;
use zeitlin_core::jacobi::{self, ContJacobiState, JacobiSweepRow};
use zeitlin_core::quant::structure::{structure_constant_direct, QuantStructureTable};
use zeitlin_core::quant::{bracket_scaled, MatrixNormKind, QuantizedBasis};
use zeitlin_core::report::{fit_convergence_rate, RateFit};
use zeitlin_core::rng::random_real_bandlimited;
use zeitlin_core::sphere::{
    inner, norm, poisson_bracket, real_harmonic, BandlimitedFunction, RealHarmonicKind, SobolevKind,
};
use zeitlin_core::{hbar, sphere};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

pub type LabResult<T> = Result<T, LabError>;

#[derive(Serialize, Deserialize)]
pub struct Manifest<C> {
    pub command: String,
    pub config: C,
}

/// Accept either a bare config or a manifest produced by an earlier run.
pub fn load_config_or_manifest<C: DeserializeOwned + Default>(
    path: Option<&PathBuf>,
    command: &str,
) -> LabResult<C> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("read {path:?}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| LabError::Config(format!("parse {path:?}: {e}")))?;
    if value.get("command").is_some() && value.get("config").is_some() {
        let manifest: Manifest<C> = serde_json::from_value(value)
            .map_err(|e| LabError::Config(format!("manifest {path:?}: {e}")))?;
        if manifest.command != command {
            return Err(LabError::Config(format!(
                "manifest was produced by '{}', not '{}'",
                manifest.command, command
            )));
        }
        Ok(manifest.config)
    } else {
        serde_json::from_value(value).map_err(|e| LabError::Config(format!("config {path:?}: {e}")))
    }
}

fn coeff_to_function(file: &CoeffFile, what: &str) -> LabResult<BandlimitedFunction> {
    BandlimitedFunction::try_from(file).map_err(|e| LabError::Config(format!("{what}: {e}")))
}

fn max_l(f: &BandlimitedFunction) -> usize {
    f.trimmed(0.0).l_max()
}

// ---------------------------------------------------------------------------
// curvature-sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct CurvatureSummary {
    pub pairs: Vec<CurvaturePairSummary>,
    pub slope_threshold: f64,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct CurvaturePairSummary {
    pub pair: usize,
    pub c_continuous: f64,
    /// Gram-normalized value, reported alongside (no rate asserted for it)
    pub c_normalized: Option<f64>,
    /// absent when every error row is zero (degenerate plane: nothing to fit)
    pub fit: Option<RateFit>,
    pub all_zero: bool,
    pub monotone: bool,
    pub passed: bool,
}

pub fn run_curvature_sweep(cfg: &CurvatureSweepConfig, out: &Path) -> LabResult<bool> {
    let pairs: Vec<(BandlimitedFunction, BandlimitedFunction)> = match (&cfg.f, &cfg.g) {
        (Some(f), Some(g)) => vec![(
            coeff_to_function(f, "curvature input f")?,
            coeff_to_function(g, "curvature input g")?,
        )],
        (None, None) => (0..cfg.pairs)
            .map(|k| {
                (
                    random_real_bandlimited(cfg.seed + 2 * k as u64, cfg.l_max),
                    random_real_bandlimited(cfg.seed + 2 * k as u64 + 1, cfg.l_max),
                )
            })
            .collect(),
        _ => {
            return Err(LabError::Config(
                "provide both f and g, or neither (seeded pairs)".into(),
            ))
        }
    };
    let window = pairs
        .iter()
        .map(|(f, g)| max_l(f) + max_l(g))
        .max()
        .unwrap_or(0);
    validate_n_list(&cfg.n_list, window).map_err(LabError::Config)?;

    let header = [
        "pair",
        "N",
        "hbar",
        "error",
        "err_term1",
        "err_term2",
        "err_term3",
        "err_term4",
    ];
    let mut csv_rows = Vec::new();
    let mut summaries = Vec::new();
    for (k, (f, g)) in pairs.iter().enumerate() {
        let rows = curvature_convergence_sweep(f, g, &cfg.n_list)?;
        for r in &rows {
            let mut rec = vec![k.to_string(), r.n.to_string(), fmt_f64(r.hbar)];
            rec.extend(r.errors.iter().map(|e| fmt_f64(*e)));
            csv_rows.push(rec);
        }
        let xs: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
        let errs: Vec<f64> = rows.iter().map(|r| r.errors[0]).collect();
        let all_zero = errs.iter().all(|&e| e < 1e-11);
        let (fit, monotone, passed) = if all_zero {
            (None, true, true)
        } else {
            let monotone = errs.windows(2).all(|w| w[1] < w[0]);
            let fit = fit_convergence_rate(&xs, &errs)?;
            let passed = fit.slope >= cfg.slope_threshold && monotone;
            (Some(fit), monotone, passed)
        };
        summaries.push(CurvaturePairSummary {
            pair: k,
            c_continuous: sectional_curvature_cont(f, g)?,
            c_normalized: sectional_curvature_cont_normalized(f, g).ok(),
            fit,
            all_zero,
            monotone,
            passed,
        });
    }
    let passed = summaries.iter().all(|s| s.passed);
    write_csv(&out.join("rows.csv"), &header, &csv_rows)?;
    write_json(
        &out.join("summary.json"),
        &CurvatureSummary {
            pairs: summaries,
            slope_threshold: cfg.slope_threshold,
            passed,
        },
    )?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            command: "curvature-sweep".into(),
            config: cfg.clone(),
        },
    )?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// jacobi-sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct JacobiSummary {
    pub l_ref: usize,
    pub dt: f64,
    pub scheme: String,
    pub stationarity_cont: f64,
    pub stationarity_quant: Vec<(usize, f64)>,
    pub fit_time: f64,
    /// absent when every error row is zero (exactly represented data)
    pub fit_upsilon: Option<RateFit>,
    pub fit_zeta: Option<RateFit>,
    pub all_zero: bool,
    /// slope fits at every grid time: (t, upsilon fit, zeta fit)
    pub fits_per_time: Vec<(f64, Option<RateFit>, Option<RateFit>)>,
    pub monotone: bool,
    pub slope_threshold: f64,
    pub passed: bool,
}

/// Default stationary base flow for the Jacobi experiment: the 𝒴_{2,0}
/// zonal profile.
pub fn default_zonal_omega() -> BandlimitedFunction {
    real_harmonic(2, 0, RealHarmonicKind::Zonal)
}

pub fn run_jacobi_sweep(cfg: &JacobiSweepConfig, out: &Path) -> LabResult<bool> {
    let omega0 = match &cfg.omega {
        Some(c) => coeff_to_function(c, "jacobi base flow")?,
        None => default_zonal_omega(),
    };
    let upsilon0 = match &cfg.upsilon {
        Some(c) => coeff_to_function(c, "jacobi upsilon0")?,
        None => random_real_bandlimited(cfg.seed, cfg.l_max),
    };
    let zeta0 = match &cfg.zeta {
        Some(c) => coeff_to_function(c, "jacobi zeta0")?,
        None => random_real_bandlimited(cfg.seed + 1, cfg.l_max),
    };
    let floor = max_l(&omega0).max(max_l(&upsilon0)).max(max_l(&zeta0));
    validate_n_list(&cfg.n_list, floor).map_err(LabError::Config)?;
    if cfg.t_grid.is_empty() || cfg.t_grid.iter().any(|&t| t <= 0.0) {
        return Err(LabError::Config("t_grid must hold positive times".into()));
    }
    if let Some(dt) = cfg.dt {
        if dt <= 0.0 {
            return Err(LabError::Config("dt must be positive".into()));
        }
    }

    let xi0 = ContJacobiState::new(upsilon0.clone(), zeta0.clone())?;
    let mut core_cfg = jacobi::JacobiSweepConfig::new(cfg.t_grid.clone(), cfg.n_list.clone());
    core_cfg.dt = cfg.dt;
    core_cfg.scheme = cfg.scheme.clone();
    let output = jacobi::jacobi_convergence_sweep(&omega0, &xi0, &core_cfg)?;

    let header = ["N", "hbar", "t", "err_upsilon_L2", "err_zeta_L2"];
    let csv_rows: Vec<Vec<String>> = output
        .rows
        .iter()
        .map(|r: &JacobiSweepRow| {
            vec![
                r.n.to_string(),
                fmt_f64(r.hbar),
                fmt_f64(r.t),
                fmt_f64(r.err_upsilon),
                fmt_f64(r.err_zeta),
            ]
        })
        .collect();
    write_csv(&out.join("rows.csv"), &header, &csv_rows)?;

    let at_fit = jacobi::rows_at_time(&output.rows, cfg.fit_time);
    if at_fit.len() < 3 {
        return Err(LabError::Config(format!(
            "fit_time {} must be on the grid and the N-list must have ≥ 3 entries",
            cfg.fit_time
        )));
    }
    let all_zero = output
        .rows
        .iter()
        .all(|r| r.err_upsilon < 1e-12 && r.err_zeta < 1e-12);
    let fit_at = |t: f64, column: usize| -> Option<RateFit> {
        let rows = jacobi::rows_at_time(&output.rows, t);
        let xs: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
        let errs: Vec<f64> = rows.iter().map(|r| r.errors[column]).collect();
        fit_convergence_rate(&xs, &errs).ok()
    };
    let fit_upsilon = fit_at(cfg.fit_time, 0);
    let fit_zeta = fit_at(cfg.fit_time, 1);
    let mut monotone = true;
    let mut fits_per_time = Vec::new();
    for &t in &cfg.t_grid {
        let rows = jacobi::rows_at_time(&output.rows, t);
        if !all_zero {
            monotone &= rows
                .windows(2)
                .all(|w| w[1].errors[0] < w[0].errors[0] && w[1].errors[1] < w[0].errors[1]);
        }
        fits_per_time.push((t, fit_at(t, 0), fit_at(t, 1)));
    }
    let passed = if all_zero {
        true
    } else {
        matches!((&fit_upsilon, &fit_zeta), (Some(u), Some(z))
            if u.slope >= cfg.slope_threshold && z.slope >= cfg.slope_threshold)
            && monotone
    };

    let mut resolved = cfg.clone();
    resolved.omega = Some(CoeffFile::from(&omega0));
    resolved.upsilon = Some(CoeffFile::from(&upsilon0));
    resolved.zeta = Some(CoeffFile::from(&zeta0));
    resolved.dt = Some(output.dt);
    write_json(
        &out.join("summary.json"),
        &JacobiSummary {
            l_ref: output.l_ref,
            dt: output.dt,
            scheme: cfg.scheme.clone(),
            stationarity_cont: output.stationarity_cont,
            stationarity_quant: output.stationarity_quant.clone(),
            fit_time: cfg.fit_time,
            fit_upsilon,
            fit_zeta,
            all_zero,
            fits_per_time,
            monotone,
            slope_threshold: cfg.slope_threshold,
            passed,
        },
    )?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            command: "jacobi-sweep".into(),
            config: resolved,
        },
    )?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// bracket-sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct BracketSummary {
    pub ratio_spread: f64,
    pub ratio_spread_threshold: f64,
    pub max_below_cutoff_diff: f64,
    pub tail_bound_violations: usize,
    pub passed: bool,
}

pub fn run_bracket_sweep(cfg: &BracketSweepConfig, out: &Path) -> LabResult<bool> {
    let f = match &cfg.f {
        Some(c) => coeff_to_function(c, "bracket input f")?,
        None => random_real_bandlimited(cfg.seed, cfg.l_max),
    };
    let g = match &cfg.g {
        Some(c) => coeff_to_function(c, "bracket input g")?,
        None => random_real_bandlimited(cfg.seed + 1, cfg.l_max),
    };
    let window = max_l(&f) + max_l(&g);
    validate_n_list(&cfg.n_list, window).map_err(LabError::Config)?;
    let br = poisson_bracket(&f, &g);

    // tail function for the Sobolev-bound regime (modes up to 3×min N)
    let min_n = cfg.n_list[0];
    let tail_l = (3 * min_n).max(window + 4);
    let tail = random_real_bandlimited(cfg.seed + 7, tail_l).scaled_by_degree(|l| {
        if l == 0 {
            0.0
        } else {
            ((l * (l + 1)) as f64).powf(-0.6)
        }
    });
    let s = cfg.tail_s;
    let tail_hs = norm(&tail, SobolevKind::Hs(s))?;

    let header = [
        "N",
        "hbar",
        "bracket_err_linf",
        "bracket_ratio",
        "l2_diff",
        "h1_diff",
        "hm1_diff",
        "tail_l2_diff",
        "tail_l2_bound",
        "tail_h1_diff",
        "tail_h1_bound",
        "tail_hm1_diff",
        "tail_hm1_bound",
    ];
    let mut csv_rows = Vec::new();
    let mut ratios = Vec::new();
    let mut max_below = 0.0f64;
    let mut violations = 0usize;
    for &n in &cfg.n_list {
        let h = hbar(n);
        // everything here lives below max(window, tail_l); skip the full
        // O(N³) basis construction
        let basis = QuantizedBasis::with_limit(n, window.max(tail_l))?;
        let pf = basis.project(&f)?;
        let pg = basis.project(&g)?;
        let lhs = bracket_scaled(&pf, &pg, h)?;
        let rhs = basis.project(&br)?;
        let err = basis.norm(&lhs.sub(&rhs), MatrixNormKind::LinfN)?;
        ratios.push(err / h);

        let mut rec = vec![n.to_string(), fmt_f64(h), fmt_f64(err), fmt_f64(err / h)];
        for (mk, sk) in [
            (MatrixNormKind::L2N, SobolevKind::L2),
            (MatrixNormKind::H1N, SobolevKind::H1),
            (MatrixNormKind::Hm1N, SobolevKind::Hm1),
        ] {
            let diff = (basis.inner(&pf, &pg, mk)? - inner(&f, &g, sk)?).abs();
            max_below = max_below.max(diff);
            rec.push(fmt_f64(diff));
        }
        let ptail = basis.project(&sphere::truncate_low(&tail, n))?;
        // projection discards the tail; compare against the full function
        for (mk, sk, extra) in [
            (MatrixNormKind::L2N, SobolevKind::L2, 0i32),
            (MatrixNormKind::H1N, SobolevKind::H1, -1),
            (MatrixNormKind::Hm1N, SobolevKind::Hm1, 1),
        ] {
            let diff = (basis.inner(&ptail, &ptail, mk)? - inner(&tail, &tail, sk)?).abs();
            let bound = 2.0 * h.powi(extra) * h.powf(s) * tail_hs * tail_hs;
            if diff > bound {
                violations += 1;
            }
            rec.push(fmt_f64(diff));
            rec.push(fmt_f64(bound));
        }
        csv_rows.push(rec);
    }
    let spread = ratios.iter().cloned().fold(0.0f64, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let passed = spread <= cfg.ratio_spread_threshold && max_below < 1e-12 && violations == 0;

    write_csv(&out.join("rows.csv"), &header, &csv_rows)?;
    write_json(
        &out.join("summary.json"),
        &BracketSummary {
            ratio_spread: spread,
            ratio_spread_threshold: cfg.ratio_spread_threshold,
            max_below_cutoff_diff: max_below,
            tail_bound_violations: violations,
            passed,
        },
    )?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            command: "bracket-sweep".into(),
            config: cfg.clone(),
        },
    )?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// structure-sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct StructureSummary {
    pub triples: Vec<StructureTripleSummary>,
    pub slope_threshold: f64,
    pub max_closed_vs_direct: f64,
    pub milnor_cont_diff: f64,
    pub milnor_quant_diff: f64,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct StructureTripleSummary {
    pub indices: (usize, i64, usize, i64, usize, i64),
    pub f_continuous: f64,
    pub fit: RateFit,
    pub passed: bool,
}

/// Deterministic list of admissible index triples with nonvanishing f̃.
/// Degrees start at 2: brackets against the l = 1 band are represented
/// exactly at every N (the generators are exact), so those triples carry
/// zero error and nothing to fit.
pub fn admissible_triples(
    count: usize,
    offset: usize,
) -> Vec<(usize, i64, usize, i64, usize, i64)> {
    let table = sphere::structure::ContStructureTable::new();
    let mut all = Vec::new();
    for la in 2..=3usize {
        for lb in 2..=3usize {
            for ma in -(la as i64)..=(la as i64) {
                for mb in -(lb as i64)..=(lb as i64) {
                    let mc = ma + mb;
                    for lc in 1..=(la + lb) {
                        if mc.unsigned_abs() as usize > lc {
                            continue;
                        }
                        if let Ok(v) = table.value(la, ma, lb, mb, lc, mc) {
                            if v.norm() > 1e-10 {
                                all.push((la, ma, lb, mb, lc, mc));
                            }
                        }
                    }
                }
            }
        }
    }
    let len = all.len();
    (0..count.min(len))
        .map(|k| all[(offset + k * 7) % len])
        .collect()
}

pub fn run_structure_sweep(cfg: &StructureSweepConfig, out: &Path) -> LabResult<bool> {
    validate_n_list(&cfg.n_list, 6).map_err(LabError::Config)?;
    let triples = admissible_triples(cfg.triples, cfg.seed as usize);
    let cont_table = sphere::structure::ContStructureTable::new();
    let quant_table = QuantStructureTable::new();

    let header = [
        "triple", "la", "ma", "lb", "mb", "lc", "mc", "N", "inv_n", "f_cont", "f_quant", "error",
    ];
    let mut csv_rows = Vec::new();
    let mut summaries = Vec::new();
    let mut max_closed_vs_direct = 0.0f64;
    for (k, &(la, ma, lb, mb, lc, mc)) in triples.iter().enumerate() {
        let f_cont = cont_table.value(la, ma, lb, mb, lc, mc)?;
        let mut xs = Vec::new();
        let mut errs = Vec::new();
        for &n in &cfg.n_list {
            let f_quant = quant_table.value(n, la, ma, lb, mb, lc, mc)?;
            let err = (f_quant - f_cont).norm();
            xs.push(1.0 / n as f64);
            errs.push(err);
            csv_rows.push(vec![
                k.to_string(),
                la.to_string(),
                ma.to_string(),
                lb.to_string(),
                mb.to_string(),
                lc.to_string(),
                mc.to_string(),
                n.to_string(),
                fmt_f64(1.0 / n as f64),
                fmt_f64(f_cont.im),
                fmt_f64(f_quant.im),
                fmt_f64(err),
            ]);
        }
        let fit = fit_convergence_rate(&xs, &errs)?;
        let passed = fit.slope >= cfg.slope_threshold;
        summaries.push(StructureTripleSummary {
            indices: (la, ma, lb, mb, lc, mc),
            f_continuous: f_cont.im,
            fit,
            passed,
        });
    }

    // closed form versus direct contraction at the cross-check N
    let basis = QuantizedBasis::with_limit(cfg.milnor_n, 6)?;
    for &(la, ma, lb, mb, lc, mc) in &triples {
        let direct = structure_constant_direct(&basis, la, ma, lb, mb, lc, mc)?;
        let closed = quant_table.value(cfg.milnor_n, la, ma, lb, mb, lc, mc)?;
        max_closed_vs_direct = max_closed_vs_direct.max((direct - closed).norm());
    }

    // Milnor cross-checks on both sides
    let a = RealBasisIndex {
        l: 1,
        m: 1,
        kind: RealHarmonicKind::Cos,
    };
    let b = RealBasisIndex {
        l: 2,
        m: 1,
        kind: RealHarmonicKind::Sin,
    };
    let milnor_cont_diff = (sectional_curvature_milnor_cont(a, b)?
        - sectional_curvature_cont(&a.function(), &b.function())?)
    .abs();
    let full_basis = QuantizedBasis::new(cfg.milnor_n)?;
    let fa = full_basis.project(&a.function())?;
    let fb = full_basis.project(&b.function())?;
    let milnor_quant_diff = (sectional_curvature_milnor_quant(&full_basis, a, b)?
        - sectional_curvature_quant(&full_basis, &fa, &fb)?)
    .abs();

    let passed = summaries.iter().all(|s| s.passed)
        && max_closed_vs_direct < 1e-9
        && milnor_cont_diff < 1e-8
        && milnor_quant_diff < 1e-8;
    write_csv(&out.join("rows.csv"), &header, &csv_rows)?;
    write_json(
        &out.join("summary.json"),
        &StructureSummary {
            triples: summaries,
            slope_threshold: cfg.slope_threshold,
            max_closed_vs_direct,
            milnor_cont_diff,
            milnor_quant_diff,
            passed,
        },
    )?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            command: "structure-sweep".into(),
            config: cfg.clone(),
        },
    )?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct SimulateSummary {
    pub n: usize,
    pub steps: usize,
    /// relative residual of the stationarity bracket for the initial data
    pub stationarity_residual: f64,
    pub energy_drift: f64,
    pub eigenvalue_drift: f64,
    pub casimir2_drift: f64,
    pub unitarity_defect: Option<f64>,
    pub det_defect: Option<f64>,
}

pub fn resolve_omega(cfg: &SimulateConfig) -> LabResult<BandlimitedFunction> {
    if let Some(c) = &cfg.omega {
        return coeff_to_function(c, "initial vorticity");
    }
    match cfg.preset.as_deref() {
        None | Some("random") => Ok(random_real_bandlimited(cfg.seed, cfg.l_max)),
        Some("zonal-l2") => Ok(real_harmonic(2, 0, RealHarmonicKind::Zonal)),
        Some("band-l2") => {
            let a = real_harmonic(2, 1, RealHarmonicKind::Cos);
            let b = real_harmonic(2, 2, RealHarmonicKind::Sin);
            Ok(&a + &(&b * 0.7))
        }
        Some(other) => Err(LabError::Config(format!(
            "unknown preset '{other}' (available: zonal-l2, band-l2, random)"
        ))),
    }
}

pub fn run_simulate(cfg: &SimulateConfig, out: &Path) -> LabResult<()> {
    if cfg.dt <= 0.0 || cfg.t_final <= 0.0 {
        return Err(LabError::Config("dt and t_final must be positive".into()));
    }
    let omega0 = resolve_omega(cfg)?;
    if max_l(&omega0) >= cfg.n {
        return Err(LabError::Config(format!(
            "N = {} must exceed the band limit {} of the initial vorticity",
            cfg.n,
            max_l(&omega0)
        )));
    }
    let basis = std::sync::Arc::new(QuantizedBasis::new(cfg.n)?);
    let integrator = ZeitlinIntegrator::new(basis.clone());
    let mut state = ZeitlinState::new(&basis, basis.project(&omega0)?, 0.0)?;
    let (_, stationarity_residual) =
        zeitlin_core::jacobi::is_stationary_quant(&basis, &state.w, 1e-10)?;
    let spectrum0 = state.w.spectrum();
    let h0 = hamiltonian_n(&basis, &state.w)?;
    let c2_0 = casimir_n(&state.w, 2);
    let steps = (cfg.t_final / cfg.dt).round() as usize;

    let header = [
        "t",
        "energy",
        "casimir2",
        "casimir3",
        "casimir4",
        "eig_drift",
    ];
    let mut rows = Vec::new();
    let mut p_samples = vec![state.p.clone()];
    let record = |state: &ZeitlinState, rows: &mut Vec<Vec<String>>| -> LabResult<()> {
        let drift = state
            .w
            .spectrum()
            .iter()
            .zip(spectrum0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        rows.push(vec![
            fmt_f64(state.t),
            fmt_f64(hamiltonian_n(&basis, &state.w)?),
            fmt_f64(casimir_n(&state.w, 2)),
            fmt_f64(casimir_n(&state.w, 3)),
            fmt_f64(casimir_n(&state.w, 4)),
            fmt_f64(drift),
        ]);
        Ok(())
    };
    record(&state, &mut rows)?;
    for k in 1..=steps {
        state = integrator.step(&state, cfg.dt)?;
        if cfg.reconstruct {
            p_samples.push(state.p.clone());
        }
        if cfg.checkpoint_every > 0 && k % cfg.checkpoint_every == 0 {
            write_step_checkpoint(out, cfg, &state, k)?;
        }
        record(&state, &mut rows)?;
    }
    write_step_checkpoint(out, cfg, &state, steps)?;
    write_csv(&out.join("diagnostics.csv"), &header, &rows)?;

    let (unitarity_defect, det_defect) = if cfg.reconstruct {
        let flow = reconstruct_flow(&p_samples, cfg.dt)?;
        zeitlin_core::io::write_matrix(&out.join("flow_map.mat"), &flow.g)
            .map_err(LabError::Core)?;
        (Some(flow.unitarity_defect()), Some(flow.det_defect()))
    } else {
        (None, None)
    };

    let final_drift = state
        .w
        .spectrum()
        .iter()
        .zip(spectrum0.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    write_json(
        &out.join("summary.json"),
        &SimulateSummary {
            n: cfg.n,
            steps,
            stationarity_residual,
            energy_drift: (hamiltonian_n(&basis, &state.w)? - h0).abs(),
            eigenvalue_drift: final_drift,
            casimir2_drift: (casimir_n(&state.w, 2) - c2_0).abs(),
            unitarity_defect,
            det_defect,
        },
    )?;
    let mut resolved = cfg.clone();
    resolved.omega = Some(CoeffFile::from(&omega0));
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            command: "simulate".into(),
            config: resolved,
        },
    )?;
    Ok(())
}

fn write_step_checkpoint(
    out: &Path,
    cfg: &SimulateConfig,
    state: &ZeitlinState,
    step: usize,
) -> LabResult<()> {
    std::fs::create_dir_all(out).map_err(|e| LabError::Config(format!("create {out:?}: {e}")))?;
    let meta = zeitlin_core::io::CheckpointMeta {
        t: state.t,
        dt: cfg.dt,
        n: cfg.n,
        diagnostics: {
            let mut map = serde_json::Map::new();
            map.insert("step".into(), json!(step));
            map
        },
    };
    zeitlin_core::io::write_checkpoint(out, &format!("checkpoint_{step:06}"), &state.w, &meta)
        .map_err(LabError::Core)
}
