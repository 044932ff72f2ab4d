use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use krb_bench::error::BenchError;
use krb_bench::grid::parse_grid_spec;
use krb_bench::run::{run_file_name, Setup};
use krb_bench::{export_model, import_model, preset, report_dir, run_experiment, ExperimentConfig, Result, Tier};
use krb_core::la::ThetaMap;
use krb_core::problems::{export_bundle, ProblemKind};
use krb_core::rkbm::online_sweep;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "krb", version, about = "Reduced Krylov basis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem bundle (Matrix Market files plus manifest).
    Gen {
        problem: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and export reduced models described by a JSON config.
    Offline {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve an exported model over a parameter grid, CSV on stdout.
    Online {
        #[arg(long)]
        model: PathBuf,
        /// Axis ranges separated by ';', e.g. "0.4:0.4:2;0:2pi/5:2pi".
        #[arg(long)]
        grid: String,
    },
    /// Run a preset experiment end to end.
    Experiment {
        preset: String,
        #[arg(long, default_value = "s")]
        tier: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Zero the timing columns so CSV output is reproducible byte for byte.
        #[arg(long)]
        deterministic: bool,
    },
    /// Re-plot the CSV files of an experiment directory.
    Report { dir: PathBuf },
}

/// Stored next to an exported model so `online` can map μ to θ.
#[derive(Serialize, Deserialize)]
struct ModelContext {
    problem: ProblemKind,
    n_cells: usize,
    theta_map: ThetaMap,
}

const CONTEXT_FILE: &str = "problem.json";

fn gen(problem: &str, n: usize, out: &Path) -> Result<()> {
    let kind: ProblemKind = problem.parse().map_err(|e: krb_core::Error| BenchError::Config(e.to_string()))?;
    let bundle = kind.generate(n).map_err(|e| BenchError::Config(e.to_string()))?;
    export_bundle(&bundle, out)?;
    println!("{kind}: {} unknowns, {} terms -> {}", bundle.dim(), bundle.op.arity(), out.display());
    Ok(())
}

fn offline(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    let resolved = config.validate()?;
    let out = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let setup = Setup::new(&config, &resolved)?;
    let thetas = resolved.instances.iter().map(|mu| setup.bundle.theta(mu)).collect::<krb_core::Result<Vec<_>>>()?;
    let context = ModelContext {
        problem: config.problem,
        n_cells: config.n_cells,
        theta_map: setup.bundle.theta_map.clone(),
    };
    for spec in &resolved.runs {
        let t0 = Instant::now();
        let model = setup.build(config.method, &thetas[..spec.l], spec.m, config.drop_tol)?;
        let name = run_file_name(config.method, spec).replace("errors_", "model_").replace(".csv", "");
        let dir = out.join(name);
        export_model(&model, &dir)?;
        fs::write(dir.join(CONTEXT_FILE), serde_json::to_string_pretty(&context)?)?;
        println!("L={} m={}: dim {} in {:.1} ms -> {}", spec.l, spec.m, model.dim(), t0.elapsed().as_secs_f64() * 1e3, dir.display());
    }
    Ok(())
}

fn online(model_dir: &Path, grid: &str) -> Result<()> {
    let grid = parse_grid_spec(grid)?;
    let model = import_model(model_dir)?;
    let map = match fs::read_to_string(model_dir.join(CONTEXT_FILE)) {
        Ok(text) => serde_json::from_str::<ModelContext>(&text)?.theta_map,
        // no context: grid points are coefficient vectors
        Err(_) => ThetaMap::Linear { arity: model.arity() },
    };
    let d = map.param_dim();
    if let Some(p) = grid.iter().find(|p| p.len() != d) {
        return Err(BenchError::Config(format!("grid point {p:?} has {} components, model expects {d}", p.len())));
    }
    let thetas = grid.iter().map(|mu| map.eval(mu)).collect::<krb_core::Result<Vec<_>>>().map_err(|e| BenchError::Config(e.to_string()))?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("mu_{i}")).collect();
    header.push("residual_norm".into());
    header.extend((1..=model.dim()).map(|i| format!("c_{i}")));
    println!("{}", header.join(","));
    for (mu, pt) in grid.iter().zip(online_sweep(&model, &thetas, false)) {
        let pt = pt?;
        let row: Vec<String> = mu
            .iter()
            .chain(std::iter::once(&pt.residual_norm))
            .chain(pt.coords.iter())
            .map(|v| format!("{v:e}"))
            .collect();
        println!("{}", row.join(","));
    }
    Ok(())
}

fn experiment(name: &str, tier: &str, out: &Path, workers: usize, deterministic: bool) -> Result<()> {
    let mut config = preset(name, tier.parse::<Tier>()?)?;
    config.output_dir = Some(out.to_path_buf());
    config.workers = workers;
    config.deterministic = deterministic;
    let report = run_experiment(&config)?;
    println!("{name} ({} cells per side, {} grid points)", config.n_cells, report.grid.len());
    println!("{:>3} {:>4} {:>6} {:>12} {:>12}", "L", "m", "dim", "sup error", "offline ms");
    for run in &report.runs {
        println!("{:>3} {:>4} {:>6} {:>12.4e} {:>12.1}", run.spec.l, run.spec.m, run.basis_dim, run.sup_error().0, run.offline_ms);
    }
    println!(
        "truth: median {:.0} us per point; wall {:.1} s -> {}",
        report.timings.truth_median_us,
        report.timings.wall_ms / 1e3,
        out.display()
    );
    Ok(())
}

fn report(dir: &Path) -> Result<()> {
    for (name, sup) in report_dir(dir)? {
        println!("{name}: sup error {sup:.4e}");
    }
    println!("wrote {}", dir.join("errors.svg").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen { problem, n, out } => gen(problem, *n, out),
        Command::Offline { config } => offline(config),
        Command::Online { model, grid } => online(model, grid),
        Command::Experiment {
            preset,
            tier,
            out,
            workers,
            deterministic,
        } => experiment(preset, tier, out, *workers, *deterministic),
        Command::Report { dir } => report(dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

