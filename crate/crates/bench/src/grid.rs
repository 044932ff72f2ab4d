//! Parameter grids: per-axis `start:step:stop` ranges with inclusive end
//! points, combined lexicographically (first axis slowest).
//!
//! Scalars accept `pi` with an optional leading factor and `/` divisor, e.g.
//! `2pi/5`, `pi/2`, `-0.5`.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// A number given either literally or as a small expression string in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Expr(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64> {
        match self {
            Scalar::Num(v) => Ok(*v),
            Scalar::Expr(s) => parse_scalar(s),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Num(v)
    }
}

pub fn values(point: &[Scalar]) -> Result<Vec<f64>> {
    point.iter().map(Scalar::value).collect()
}

fn parse_factor(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || config_err(format!("cannot parse number '{s}'"));
    if let Some(coef) = s.strip_suffix("pi") {
        let c = match coef.trim().trim_end_matches('*') {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.trim().parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(c * std::f64::consts::PI);
    }
    s.parse::<f64>().map_err(|_| bad())
}

/// `a`, `a/b`, with `pi` allowed in either part.
pub fn parse_scalar(s: &str) -> Result<f64> {
    let mut parts = s.split('/');
    let mut v = parse_factor(parts.next().unwrap_or(""))?;
    for d in parts {
        let d = parse_factor(d)?;
        if d == 0.0 {
            return Err(config_err(format!("division by zero in '{s}'")));
        }
        v /= d;
    }
    if !v.is_finite() {
        return Err(config_err(format!("non-finite value '{s}'")));
    }
    Ok(v)
}

/// Points of one axis. Either a single value or `start:step:stop`; the stop
/// value is included when it lies on the lattice up to rounding.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![parse_scalar(v)?]),
        [a, s, b] => {
            let (start, step, stop) = (parse_scalar(a)?, parse_scalar(s)?, parse_scalar(b)?);
            if step == 0.0 {
                return Err(config_err(format!("zero step in '{spec}'")));
            }
            let span = (stop - start) / step;
            if span < -1e-10 {
                return Ok(Vec::new());
            }
            let count = (span + 1e-10 * span.abs().max(1.0)).floor() as usize + 1;
            Ok((0..count)
                .map(|k| {
                    let v = start + k as f64 * step;
                    // snap the last point to the requested end
                    if k + 1 == count && (v - stop).abs() <= 1e-10 * step.abs() {
                        stop
                    } else {
                        v
                    }
                })
                .collect())
        }
        _ => Err(config_err(format!("axis spec '{spec}' is neither a value nor start:step:stop"))),
    }
}

/// Axis specs separated by `;` (CLI form), e.g. `0.4:0.4:2;0:2pi/5:2pi`.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<Vec<f64>>> {
    let axes: Vec<String> = spec.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    grid_points(&axes)
}

/// Cartesian product in lexicographic order (last axis fastest).
pub fn grid_points(axes: &[String]) -> Result<Vec<Vec<f64>>> {
    if axes.is_empty() {
        return Err(config_err("parameter grid has no axes"));
    }
    let axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>>>()?;
    let mut points = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    if points.is_empty() {
        return Err(config_err("parameter grid is empty"));
    }
    Ok(points)
}
