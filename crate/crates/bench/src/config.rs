//! Experiment configuration, validation and the built-in presets.

use std::path::PathBuf;
use std::str::FromStr;

use krb_core::problems::ProblemKind;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, BenchError, Result};
use crate::grid::{grid_points, values, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rcgbm,
    Rkbm1,
    Rkbm2,
    Mrcgbm,
    Mrkbm1,
    Mrkbm2,
}

impl Method {
    pub fn is_multi(&self) -> bool {
        matches!(self, Method::Mrcgbm | Method::Mrkbm1 | Method::Mrkbm2)
    }
}

/// Norm of the reported relative errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `A(μ)` (its symmetric part for nonsymmetric problems).
    Energy,
    H1Semi,
    /// `h1_semi + l2`.
    Combined,
    L2,
    /// `‖BA(μ)(u − û)‖_M / ‖Bf‖_M`.
    MResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    /// `A(μ₀)⁻¹`.
    #[default]
    Exact,
    /// Inverse of the diagonal component blocks of `A(μ₀)`.
    BlockDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    #[default]
    Identity,
    H1Semi,
}

/// One offline build: `l` harvest instances with budget `m` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub l: usize,
    pub m: usize,
}

fn default_drop_tol() -> f64 {
    krb_core::la::DEFAULT_DROP_TOL
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Cells per side of the mesh.
    pub n_cells: usize,
    pub method: Method,
    pub mu0: Vec<Scalar>,
    pub mu_instances: Vec<Vec<Scalar>>,
    /// Step budgets; crossed with `instance_counts` unless `runs` is given.
    #[serde(default)]
    pub m: Vec<usize>,
    /// Values of `L` (multi-instance methods).
    #[serde(default)]
    pub instance_counts: Option<Vec<usize>>,
    /// Explicit `(L, m)` schedule, overriding the cross product.
    #[serde(default)]
    pub runs: Option<Vec<RunSpec>>,
    /// One range spec per parameter axis.
    pub grid: Vec<String>,
    pub norm: NormKind,
    #[serde(default)]
    pub weight: WeightKind,
    #[serde(default)]
    pub preconditioner: PreconditionerKind,
    #[serde(default = "default_drop_tol")]
    pub drop_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Write zeros in timing columns so CSV files are byte-reproducible.
    #[serde(default)]
    pub deterministic: bool,
}

/// Numeric form of a validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub mu0: Vec<f64>,
    pub instances: Vec<Vec<f64>>,
    pub grid: Vec<Vec<f64>>,
    pub runs: Vec<RunSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("cannot parse config: {e}")))
    }

    pub fn schedule(&self) -> Vec<RunSpec> {
        if let Some(r) = &self.runs {
            return r.clone();
        }
        let ls = match (&self.instance_counts, self.method.is_multi()) {
            (Some(ls), true) => ls.clone(),
            (None, true) => vec![self.mu_instances.len()],
            _ => vec![1],
        };
        ls.iter().flat_map(|&l| self.m.iter().map(move |&m| RunSpec { l, m })).collect()
    }

    /// Checks every invariant that can be checked without assembling anything.
    pub fn validate(&self) -> Result<Resolved> {
        let map = theta_map_of(self.problem);
        let d = map.param_dim();
        if self.n_cells < 2 {
            return Err(config_err(format!("n_cells must be at least 2, got {}", self.n_cells)));
        }
        if self.problem == ProblemKind::Pwcoeff && self.n_cells % 2 != 0 {
            return Err(config_err("pwcoeff needs an even n_cells"));
        }
        if self.workers == 0 {
            return Err(config_err("workers must be at least 1"));
        }
        if !(self.drop_tol >= 0.0 && self.drop_tol < 1.0) {
            return Err(config_err(format!("drop_tol {} outside [0, 1)", self.drop_tol)));
        }
        let point = |p: &[Scalar], what: &str| -> Result<Vec<f64>> {
            let v = values(p)?;
            if v.len() != d {
                return Err(config_err(format!("{what} has {} components, problem {} expects {d}", v.len(), self.problem)));
            }
            map.eval(&v).map_err(|e| config_err(format!("{what} {v:?}: {e}")))?;
            Ok(v)
        };
        let mu0 = point(&self.mu0, "mu0")?;
        let instances = self
            .mu_instances
            .iter()
            .enumerate()
            .map(|(i, p)| point(p, &format!("mu_instances[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if instances.is_empty() {
            return Err(config_err("mu_instances is empty"));
        }
        if instances.iter().any(|p| *p == mu0) {
            return Err(config_err("mu0 must not be one of the mu_instances"));
        }
        let grid = grid_points(&self.grid)?;
        if let Some(bad) = grid.iter().find(|p| p.len() != d) {
            return Err(config_err(format!("grid point {bad:?} has {} components, expected {d}", bad.len())));
        }
        if self.runs.is_none() && self.m.is_empty() {
            return Err(config_err("no step budgets: give m or runs"));
        }
        let runs = self.schedule();
        if runs.is_empty() {
            return Err(config_err("empty run schedule"));
        }
        for r in &runs {
            if r.m == 0 {
                return Err(config_err("step budget m must be at least 1"));
            }
            if r.l == 0 || r.l > instances.len() {
                return Err(config_err(format!("L = {} outside 1..={}", r.l, instances.len())));
            }
            if !self.method.is_multi() && r.l != 1 {
                return Err(config_err(format!("{:?} is a single-instance method; L must be 1", self.method)));
            }
        }
        if self.preconditioner == PreconditionerKind::BlockDiagonal && self.problem != ProblemKind::Elasticity {
            return Err(config_err("block_diagonal preconditioner needs a vector-valued problem"));
        }
        Ok(Resolved {
            mu0,
            instances,
            grid,
            runs,
        })
    }
}

pub(crate) fn theta_map_of(kind: ProblemKind) -> krb_core::la::ThetaMap {
    use krb_core::la::ThetaMap;
    match kind {
        ProblemKind::Pwcoeff => ThetaMap::Linear { arity: 4 },
        ProblemKind::Convdiff => ThetaMap::ConvectionDiffusion,
        ProblemKind::Stiffmass => ThetaMap::StiffnessMass,
        ProblemKind::Helmholtz => ThetaMap::Helmholtz,
        ProblemKind::Elasticity => ThetaMap::Elasticity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    S,
    M,
    L,
}

impl FromStr for Tier {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(Tier::S),
            "m" => Ok(Tier::M),
            "l" => Ok(Tier::L),
            _ => Err(config_err(format!("unknown tier '{s}' (expected s, m or l)"))),
        }
    }
}

pub const PRESETS: [&str; 5] = ["stiffmass-rcgbm", "convdiff-rkbm1", "convdiff-rkbm2", "elasticity-mrcgbm", "pwcoeff-mrcgbm"];

fn pt(v: &[f64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::Num(x)).collect()
}

/// Cells per side for each preset and tier.
fn cells(problem: ProblemKind, tier: Tier) -> usize {
    let base = match problem {
        ProblemKind::Convdiff => 64,
        ProblemKind::Pwcoeff => 128,
        ProblemKind::Stiffmass | ProblemKind::Helmholtz => 32,
        ProblemKind::Elasticity => 16,
    };
    base * match tier {
        Tier::S => 1,
        Tier::M => 2,
        Tier::L => 4,
    }
}

pub fn preset(name: &str, tier: Tier) -> Result<ExperimentConfig> {
    let base = |problem: ProblemKind, method: Method| ExperimentConfig {
        problem,
        n_cells: cells(problem, tier),
        method,
        mu0: Vec::new(),
        mu_instances: Vec::new(),
        m: Vec::new(),
        instance_counts: None,
        runs: None,
        grid: Vec::new(),
        norm: NormKind::H1Semi,
        weight: WeightKind::Identity,
        preconditioner: PreconditionerKind::Exact,
        drop_tol: default_drop_tol(),
        seed: 0,
        output_dir: None,
        workers: 1,
        deterministic: false,
    };
    let convdiff = |method: Method, m: Vec<usize>| ExperimentConfig {
        mu0: vec![Scalar::Num(1.0), Scalar::Expr("pi/2".into())],
        mu_instances: vec![pt(&[1.0, 0.0])],
        m,
        grid: vec!["0.4:0.4:2".into(), "0:2pi/5:2pi".into()],
        norm: NormKind::H1Semi,
        weight: WeightKind::H1Semi,
        ..base(ProblemKind::Convdiff, method)
    };
    Ok(match name {
        "stiffmass-rcgbm" => ExperimentConfig {
            mu0: pt(&[1.0, 1.0]),
            mu_instances: vec![pt(&[1.0, 2.0])],
            m: vec![5, 10, 15],
            grid: vec!["1:0.4:3".into(), "1:0.4:3".into()],
            norm: NormKind::Combined,
            ..base(ProblemKind::Stiffmass, Method::Rcgbm)
        },
        "convdiff-rkbm1" => convdiff(Method::Rkbm1, vec![10, 15, 20]),
        "convdiff-rkbm2" => convdiff(Method::Rkbm2, vec![10, 15, 20]),
        "elasticity-mrcgbm" => ExperimentConfig {
            mu0: pt(&[1.0, 0.05]),
            mu_instances: vec![pt(&[1.0, 0.1]), pt(&[1.0, 0.25]), pt(&[1.0, 0.3])],
            runs: Some(vec![
                RunSpec { l: 1, m: 24 },
                RunSpec { l: 2, m: 12 },
                RunSpec { l: 3, m: 4 },
                RunSpec { l: 3, m: 6 },
                RunSpec { l: 3, m: 8 },
            ]),
            grid: vec!["1".into(), "0.05:0.01:0.3".into()],
            norm: NormKind::Energy,
            preconditioner: PreconditionerKind::BlockDiagonal,
            ..base(ProblemKind::Elasticity, Method::Mrcgbm)
        },
        "pwcoeff-mrcgbm" => ExperimentConfig {
            mu0: pt(&[1.0; 4]),
            mu_instances: vec![pt(&[1.0, 2.0, 3.0, 4.0]), pt(&[1.0, 2.0, 1.0, 4.0]), pt(&[1.0, 1.0, 2.0, 4.0])],
            m: vec![5, 10, 15],
            instance_counts: Some(vec![1, 2, 3]),
            grid: vec!["1:1:3".into(); 4],
            norm: NormKind::H1Semi,
            ..base(ProblemKind::Pwcoeff, Method::Mrcgbm)
        },
        _ => {
            return Err(config_err(format!("unknown preset '{name}'; available presets: {}", PRESETS.join(", "))));
        }
    })
}
