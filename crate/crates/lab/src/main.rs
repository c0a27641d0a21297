use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use zeitlin_lab::config::*;
use zeitlin_lab::sweeps::{self, LabError};
use zeitlin_lab::{verify, EXIT_INPUT, EXIT_PASS, EXIT_THRESHOLD};

/// Numerical laboratory for the su(N) discretization of ideal hydrodynamics
/// on the sphere: isospectral simulation, curvature and Jacobi convergence
/// sweeps, bracket and structure-constant estimates, and a property battery.
#[derive(Parser)]
#[command(name = "zeitlin-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config (a manifest from an earlier run also works)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: $ZEITLIN_LAB_OUT or ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for generated test functions
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweep cells (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the isospectral matrix flow and record diagnostics
    Simulate(SimulateArgs),
    /// Curvature convergence experiment: |C_N − C| against ħ_N
    CurvatureSweep(CurvatureArgs),
    /// Jacobi convergence experiment: reduced-perturbation errors against ħ_N
    JacobiSweep(JacobiArgs),
    /// Bracket and norm estimates across the N-list
    BracketSweep(BracketArgs),
    /// Structure-constant convergence and the Milnor cross-checks
    StructureSweep(StructureArgs),
    /// Run the lemma-level property battery at one N
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Initial vorticity coefficient file (JSON)
    #[arg(long)]
    omega: Option<PathBuf>,
    /// zonal-l2 | band-l2 | random
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Also reconstruct the SU(N) flow map
    #[arg(long)]
    reconstruct: bool,
}

#[derive(Args)]
struct CurvatureArgs {
    /// Comma-separated N values
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    slope_threshold: Option<f64>,
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long)]
    g: Option<PathBuf>,
}

#[derive(Args)]
struct JacobiArgs {
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Comma-separated sample times
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    /// rk4 | strang
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    slope_threshold: Option<f64>,
    #[arg(long)]
    fit_time: Option<f64>,
    #[arg(long)]
    omega: Option<PathBuf>,
    #[arg(long)]
    upsilon: Option<PathBuf>,
    #[arg(long)]
    zeta: Option<PathBuf>,
}

#[derive(Args)]
struct BracketArgs {
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    ratio_spread_threshold: Option<f64>,
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long)]
    g: Option<PathBuf>,
}

#[derive(Args)]
struct StructureArgs {
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    slope_threshold: Option<f64>,
    #[arg(long)]
    milnor_n: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: Option<usize>,
}

fn read_coeff_file(path: &PathBuf) -> Result<zeitlin_core::io::CoeffFile, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("read {path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("parse {path:?}: {e}")))
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let code = match run(cli) {
        Ok(passed) => {
            if passed {
                EXIT_PASS
            } else {
                eprintln!("threshold failure (see summary.json)");
                EXIT_THRESHOLD
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_INPUT
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<bool, LabError> {
    let out_root = resolve_out_dir(cli.out.clone());
    match cli.command {
        Command::Simulate(args) => {
            let mut cfg: SimulateConfig =
                sweeps::load_config_or_manifest(cli.config.as_ref(), "simulate")?;
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(t) = args.t_final {
                cfg.t_final = t;
            }
            if let Some(dt) = args.dt {
                cfg.dt = dt;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(path) = &args.omega {
                cfg.omega = Some(read_coeff_file(path)?);
            }
            if args.preset.is_some() {
                cfg.preset = args.preset;
            }
            if let Some(k) = args.checkpoint_every {
                cfg.checkpoint_every = k;
            }
            if args.reconstruct {
                cfg.reconstruct = true;
            }
            sweeps::run_simulate(&cfg, &out_root.join("simulate"))?;
            println!(
                "simulate: wrote diagnostics to {:?}",
                out_root.join("simulate")
            );
            Ok(true)
        }
        Command::CurvatureSweep(args) => {
            let mut cfg: CurvatureSweepConfig =
                sweeps::load_config_or_manifest(cli.config.as_ref(), "curvature-sweep")?;
            if let Some(v) = args.n_list {
                cfg.n_list = v;
            }
            if let Some(v) = args.pairs {
                cfg.pairs = v;
            }
            if let Some(v) = args.l_max {
                cfg.l_max = v;
            }
            if let Some(v) = args.slope_threshold {
                cfg.slope_threshold = v;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(path) = &args.f {
                cfg.f = Some(read_coeff_file(path)?);
            }
            if let Some(path) = &args.g {
                cfg.g = Some(read_coeff_file(path)?);
            }
            let dir = out_root.join("curvature-sweep");
            let passed = sweeps::run_curvature_sweep(&cfg, &dir)?;
            println!(
                "curvature-sweep: {} (artifacts in {dir:?})",
                if passed { "PASS" } else { "FAIL" }
            );
            Ok(passed)
        }
        Command::JacobiSweep(args) => {
            let mut cfg: JacobiSweepConfig =
                sweeps::load_config_or_manifest(cli.config.as_ref(), "jacobi-sweep")?;
            if let Some(v) = args.n_list {
                cfg.n_list = v;
            }
            if let Some(v) = args.t_grid {
                cfg.t_grid = v;
            }
            if args.dt.is_some() {
                cfg.dt = args.dt;
            }
            if let Some(v) = args.scheme {
                cfg.scheme = v;
            }
            if let Some(v) = args.l_max {
                cfg.l_max = v;
            }
            if let Some(v) = args.slope_threshold {
                cfg.slope_threshold = v;
            }
            if let Some(v) = args.fit_time {
                cfg.fit_time = v;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(path) = &args.omega {
                cfg.omega = Some(read_coeff_file(path)?);
            }
            if let Some(path) = &args.upsilon {
                cfg.upsilon = Some(read_coeff_file(path)?);
            }
            if let Some(path) = &args.zeta {
                cfg.zeta = Some(read_coeff_file(path)?);
            }
            let dir = out_root.join("jacobi-sweep");
            let passed = sweeps::run_jacobi_sweep(&cfg, &dir)?;
            println!(
                "jacobi-sweep: {} (artifacts in {dir:?})",
                if passed { "PASS" } else { "FAIL" }
            );
            Ok(passed)
        }
        Command::BracketSweep(args) => {
            let mut cfg: BracketSweepConfig =
                sweeps::load_config_or_manifest(cli.config.as_ref(), "bracket-sweep")?;
            if let Some(v) = args.n_list {
                cfg.n_list = v;
            }
            if let Some(v) = args.l_max {
                cfg.l_max = v;
            }
            if let Some(v) = args.ratio_spread_threshold {
                cfg.ratio_spread_threshold = v;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(path) = &args.f {
                cfg.f = Some(read_coeff_file(path)?);
            }
            if let Some(path) = &args.g {
                cfg.g = Some(read_coeff_file(path)?);
            }
            let dir = out_root.join("bracket-sweep");
            let passed = sweeps::run_bracket_sweep(&cfg, &dir)?;
            println!(
                "bracket-sweep: {} (artifacts in {dir:?})",
                if passed { "PASS" } else { "FAIL" }
            );
            Ok(passed)
        }
        Command::StructureSweep(args) => {
            let mut cfg: StructureSweepConfig =
                sweeps::load_config_or_manifest(cli.config.as_ref(), "structure-sweep")?;
            if let Some(v) = args.n_list {
                cfg.n_list = v;
            }
            if let Some(v) = args.triples {
                cfg.triples = v;
            }
            if let Some(v) = args.slope_threshold {
                cfg.slope_threshold = v;
            }
            if let Some(v) = args.milnor_n {
                cfg.milnor_n = v;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let dir = out_root.join("structure-sweep");
            let passed = sweeps::run_structure_sweep(&cfg, &dir)?;
            println!(
                "structure-sweep: {} (artifacts in {dir:?})",
                if passed { "PASS" } else { "FAIL" }
            );
            Ok(passed)
        }
        Command::Verify(args) => {
            let mut cfg: VerifyConfig =
                sweeps::load_config_or_manifest(cli.config.as_ref(), "verify")?;
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let checks = verify::run_battery(&cfg)?;
            let mut passed = true;
            for c in &checks {
                println!(
                    "{} {} ({})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                passed &= c.passed;
            }
            println!(
                "verify --N {}: {}/{} checks passed",
                cfg.n,
                checks.iter().filter(|c| c.passed).count(),
                checks.len()
            );
            Ok(passed)
        }
    }
}
