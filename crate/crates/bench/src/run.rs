//! Offline builds, grid sweeps against truth solves, and report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use krb_core::factor::{lu_factor_with_order, make_block_preconditioner, make_exact_preconditioner, rcm_order, CholeskySymbolic, Factorization, Permutation};
use krb_core::la::{vector, LinearOperatorHandle, SparseMatrix, SpdWeight};
use krb_core::problems::ProblemBundle;
use krb_core::rkbm::{build_multi, build_rcgbm, build_rkbm1, build_rkbm2, online_sweep, MultiMode, ReducedModel};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Method, NormKind, PreconditionerKind, Resolved, RunSpec, WeightKind};
use crate::error::{BenchError, Result};
use crate::svg;

/// Problem, preconditioner and weight shared by every run of an experiment.
pub struct Setup {
    pub bundle: ProblemBundle,
    pub theta0: Vec<f64>,
    pub b: LinearOperatorHandle,
    pub weight: SpdWeight,
}

impl Setup {
    pub fn new(config: &ExperimentConfig, resolved: &Resolved) -> Result<Self> {
        let bundle = config.problem.generate(config.n_cells)?;
        let theta0 = bundle.theta(&resolved.mu0)?;
        let spd = bundle.op.is_symmetric();
        let b = match config.preconditioner {
            PreconditionerKind::Exact => make_exact_preconditioner(&bundle.op, &theta0, spd)?,
            PreconditionerKind::BlockDiagonal => make_block_preconditioner(&bundle.op, &theta0, &bundle.block_offsets, spd)?,
        };
        let weight = match config.weight {
            WeightKind::Identity => SpdWeight::Identity,
            WeightKind::H1Semi => SpdWeight::matrix(bundle.norms.h1_semi.clone())?,
        };
        Ok(Self { bundle, theta0, b, weight })
    }

    /// Offline stage for `method` with the first `l` instances (given in θ form).
    pub fn build(&self, method: Method, thetas: &[Vec<f64>], m: usize, drop_tol: f64) -> Result<ReducedModel> {
        let (op, f, b) = (&self.bundle.op, &self.bundle.rhs, self.b.as_ref());
        let model = match method {
            Method::Rcgbm => build_rcgbm(op, f, b, &thetas[0], m)?,
            Method::Rkbm1 => build_rkbm1(op, f, b, &self.weight, &thetas[0], m)?,
            Method::Rkbm2 => build_rkbm2(op, f, b, &thetas[0], f, m)?,
            Method::Mrcgbm => build_multi(op, f, b, &self.weight, thetas, m, MultiMode::Mrcgbm, drop_tol)?,
            Method::Mrkbm1 => build_multi(op, f, b, &self.weight, thetas, m, MultiMode::Mrkbm1, drop_tol)?,
            Method::Mrkbm2 => build_multi(op, f, b, &self.weight, thetas, m, MultiMode::Mrkbm2, drop_tol)?,
        };
        Ok(model)
    }
}

/// Direct solves of `A(θ) u = f` sharing one ordering (and, for symmetric
/// operators, one symbolic Cholesky analysis).
pub struct TruthSolver<'a> {
    bundle: &'a ProblemBundle,
    symbolic: Option<CholeskySymbolic>,
    order: Permutation,
}

impl<'a> TruthSolver<'a> {
    pub fn new(bundle: &'a ProblemBundle) -> Result<Self> {
        let pattern = bundle.op.assemble(&vec![1.0; bundle.op.arity()])?;
        let order = rcm_order(&pattern);
        let symbolic = if bundle.op.is_symmetric() {
            Some(CholeskySymbolic::with_permutation(&pattern, order.clone())?)
        } else {
            None
        };
        Ok(Self { bundle, symbolic, order })
    }

    /// Returns the solution and the assembled matrix.
    pub fn solve(&self, theta: &[f64]) -> Result<(Vec<f64>, SparseMatrix)> {
        let a = self.bundle.op.assemble(theta)?;
        let factor = match &self.symbolic {
            // indefinite symmetric systems (Helmholtz) fall back to LU
            Some(s) => match s.factor(&a) {
                Ok(c) => Factorization::Cholesky(c),
                Err(krb_core::Error::NotPositiveDefinite { .. }) => Factorization::Lu(lu_factor_with_order(&a, self.order.clone())?),
                Err(e) => return Err(e.into()),
            },
            None => Factorization::Lu(lu_factor_with_order(&a, self.order.clone())?),
        };
        let u = factor.solve(&self.bundle.rhs);
        if !vector::all_finite(&u) {
            return Err(krb_core::Error::Singular { column: 0 }.into());
        }
        Ok((u, a))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub rel_error: f64,
    pub residual_norm: f64,
    pub online_us: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub spec: RunSpec,
    pub basis_dim: usize,
    pub offline_ms: f64,
    pub points: Vec<PointResult>,
    pub notes: Vec<String>,
}

impl RunResult {
    pub fn errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rel_error).collect()
    }

    /// `(sup error, 0-based index of the worst point)`.
    pub fn sup_error(&self) -> (f64, usize) {
        self.points
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |(best, bi), (i, p)| if p.rel_error > best { (p.rel_error, i) } else { (best, bi) })
    }

    pub fn median_online_us(&self) -> f64 {
        median(self.points.iter().map(|p| p.online_us).collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub offline_ms: Vec<f64>,
    pub truth_total_ms: f64,
    pub truth_median_us: f64,
    pub online_median_us: Vec<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub grid: Vec<Vec<f64>>,
    pub runs: Vec<RunResult>,
    pub truth_us: Vec<f64>,
    pub timings: Timings,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentReport {
    pub fn run(&self, l: usize, m: usize) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.spec.l == l && r.spec.m == m)
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn relative(w: &SparseMatrix, truth: &[f64], approx: &[f64]) -> f64 {
    let e = vector::sub(truth, approx);
    let num = w.bilinear(&e, &e).max(0.0).sqrt();
    let den = w.bilinear(truth, truth).max(0.0).sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

struct PointEval {
    truth_us: f64,
    per_run: Vec<PointResult>,
}

fn evaluate_point(setup: &Setup, solver: &TruthSolver, models: &[ReducedModel], norm: NormKind, mu: &[f64]) -> Result<PointEval> {
    let theta = setup.bundle.theta(mu)?;
    let t0 = Instant::now();
    let (u, a) = solver.solve(&theta)?;
    let truth_us = t0.elapsed().as_secs_f64() * 1e6;
    let combined = (norm == NormKind::Combined).then(|| setup.bundle.norms.combined());
    let bf_m = if norm == NormKind::MResidual { setup.weight.norm(&setup.b.apply(&setup.bundle.rhs))? } else { 0.0 };
    let mut per_run = Vec::with_capacity(models.len());
    for model in models {
        let t1 = Instant::now();
        let pt = online_sweep(model, std::slice::from_ref(&theta), false).pop().expect("one point in, one out")?;
        let online_us = t1.elapsed().as_secs_f64() * 1e6;
        let uh = model.p().matvec(&pt.coords)?;
        let rel_error = match norm {
            NormKind::Energy => relative(&a, &u, &uh),
            NormKind::H1Semi => relative(&setup.bundle.norms.h1_semi, &u, &uh),
            NormKind::L2 => relative(&setup.bundle.norms.l2, &u, &uh),
            NormKind::Combined => relative(combined.as_ref().expect("set above"), &u, &uh),
            NormKind::MResidual => {
                let r = setup.b.apply(&a.spmv(&vector::sub(&u, &uh))?);
                let rn = setup.weight.norm(&r)?;
                if bf_m > 0.0 {
                    rn / bf_m
                } else {
                    rn
                }
            }
        };
        per_run.push(PointResult {
            rel_error,
            residual_norm: pt.residual_norm,
            online_us,
        });
    }
    Ok(PointEval { truth_us, per_run })
}

/// Builds every model of the schedule, sweeps the grid against truth solves
/// and, when `output_dir` is set, writes CSV, SVG and timing files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let resolved = config.validate()?;
    let wall = Instant::now();
    let setup = Setup::new(config, &resolved)?;
    let thetas = resolved.instances.iter().map(|mu| setup.bundle.theta(mu)).collect::<krb_core::Result<Vec<_>>>()?;

    let mut models = Vec::new();
    let mut offline_ms = Vec::new();
    for spec in &resolved.runs {
        let t0 = Instant::now();
        let model = setup.build(config.method, &thetas[..spec.l], spec.m, config.drop_tol)?;
        offline_ms.push(t0.elapsed().as_secs_f64() * 1e3);
        models.push(model);
    }

    let solver = TruthSolver::new(&setup.bundle)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build()?;
    let evals: Vec<PointEval> = pool.install(|| {
        resolved
            .grid
            .par_iter()
            .map(|mu| evaluate_point(&setup, &solver, &models, config.norm, mu))
            .collect::<Result<Vec<_>>>()
    })?;

    let runs: Vec<RunResult> = resolved
        .runs
        .iter()
        .enumerate()
        .map(|(k, spec)| RunResult {
            spec: *spec,
            basis_dim: models[k].dim(),
            offline_ms: offline_ms[k],
            points: evals.iter().map(|e| e.per_run[k].clone()).collect(),
            notes: models[k].meta().notes.clone(),
        })
        .collect();
    let truth_us: Vec<f64> = evals.iter().map(|e| e.truth_us).collect();
    let timings = Timings {
        offline_ms,
        truth_total_ms: truth_us.iter().sum::<f64>() / 1e3,
        truth_median_us: median(truth_us.clone()),
        online_median_us: runs.iter().map(RunResult::median_online_us).collect(),
        wall_ms: wall.elapsed().as_secs_f64() * 1e3,
    };
    let report = ExperimentReport {
        grid: resolved.grid,
        runs,
        truth_us,
        timings,
        output_dir: config.output_dir.clone(),
    };
    if let Some(dir) = &config.output_dir {
        write_outputs(config, &report, dir)?;
    }
    Ok(report)
}

pub fn run_file_name(method: Method, spec: &RunSpec) -> String {
    if method.is_multi() {
        format!("errors_L{}_m{}.csv", spec.l, spec.m)
    } else {
        format!("errors_m{}.csv", spec.m)
    }
}

fn fmt_time(config: &ExperimentConfig, v: f64) -> String {
    if config.deterministic {
        "0".into()
    } else {
        format!("{v:.3}")
    }
}

pub fn write_outputs(config: &ExperimentConfig, report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let d = report.grid.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=d).map(|i| format!("mu_{i}")).chain(["m", "rel_error", "residual_norm", "online_us"].map(String::from)).collect();
    for run in &report.runs {
        let mut s = header.join(",") + "\n";
        for (mu, p) in report.grid.iter().zip(&run.points) {
            let mut row: Vec<String> = mu.iter().map(|v| format!("{v:e}")).collect();
            row.push(run.spec.m.to_string());
            row.push(format!("{:e}", p.rel_error));
            row.push(format!("{:e}", p.residual_norm));
            row.push(fmt_time(config, p.online_us));
            s += &(row.join(",") + "\n");
        }
        fs::write(dir.join(run_file_name(config.method, &run.spec)), s)?;
    }
    let mut s = String::from("L,m,basis_dim,sup_rel_error,argmax_index,offline_ms,median_online_us\n");
    for run in &report.runs {
        let (sup, at) = run.sup_error();
        s += &format!(
            "{},{},{},{:e},{},{},{}\n",
            run.spec.l,
            run.spec.m,
            run.basis_dim,
            sup,
            at + 1,
            fmt_time(config, run.offline_ms),
            fmt_time(config, run.median_online_us())
        );
    }
    fs::write(dir.join("summary.csv"), s)?;
    fs::write(dir.join("timings.json"), serde_json::to_string_pretty(&report.timings)?)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
    let series: Vec<svg::Series> = report
        .runs
        .iter()
        .map(|r| svg::Series {
            label: if config.method.is_multi() { format!("L={} m={}", r.spec.l, r.spec.m) } else { format!("m={}", r.spec.m) },
            values: r.errors(),
        })
        .collect();
    let title = format!("{:?} on {} ({} cells per side)", config.method, config.problem, config.n_cells).to_lowercase();
    fs::write(dir.join("errors.svg"), svg::render(&title, &series))?;
    Ok(())
}

/// Rebuilds `errors.svg` from the per-run CSV files in `dir` and returns
/// `(file, sup error)` per file, checking each against `summary.csv` when present.
pub fn report_dir(dir: &Path) -> Result<Vec<(String, f64)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("errors_") && n.ends_with(".csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(BenchError::Config(format!("no errors_*.csv files in {}", dir.display())));
    }
    let mut series = Vec::new();
    let mut out = Vec::new();
    for path in &files {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
        let col = header
            .iter()
            .position(|h| *h == "rel_error")
            .ok_or_else(|| BenchError::Config(format!("{} has no rel_error column", path.display())))?;
        let values = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .nth(col)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| BenchError::Config(format!("bad row in {}: {l}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").trim_start_matches("errors_").to_string();
        out.push((name.clone(), values.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
        series.push(svg::Series { label: name, values });
    }
    fs::write(dir.join("errors.svg"), svg::render(&dir.display().to_string(), &series))?;
    Ok(out)
}
