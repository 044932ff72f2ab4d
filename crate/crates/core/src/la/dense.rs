//! Column-major dense matrices and the small LU solver used by every online stage.

use crate::error::{check_dim, Error, Result};
use crate::la::vector;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a.set(i, i, 1.0);
        }
        a
    }

    /// Wraps column-major storage.
    pub fn from_col_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        check_dim("dense values", nrows * ncols, values.len())?;
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    /// Builds from row slices; convenient in tests and hand examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut a = Self::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            check_dim("dense row", ncols, r.len())?;
            for (j, &v) in r.iter().enumerate() {
                a.set(i, j, v);
            }
        }
        Ok(a)
    }

    pub fn from_columns(nrows: usize, cols: &[Vec<f64>]) -> Result<Self> {
        let mut values = Vec::with_capacity(nrows * cols.len());
        for c in cols {
            check_dim("dense column", nrows, c.len())?;
            values.extend_from_slice(c);
        }
        Ok(Self {
            nrows,
            ncols: cols.len(),
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.nrows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.values[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.nrows.max(1)).take(self.ncols)
    }

    /// Leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        let k = k.min(self.ncols);
        Self {
            nrows: self.nrows,
            ncols: k,
            values: self.values[..k * self.nrows].to_vec(),
        }
    }

    /// Leading `k × k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        let mut b = Self::zeros(k, k);
        for j in 0..k {
            for i in 0..k {
                b.set(i, j, self.get(i, j));
            }
        }
        b
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("dense matvec", self.ncols, x.len())?;
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            vector::axpy(xj, self.col(j), &mut y);
        }
        Ok(y)
    }

    /// `Aᵀ x`.
    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("dense matvec_transpose", self.nrows, x.len())?;
        Ok(self.columns().map(|c| vector::dot(c, x)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        check_dim("dense matmul", self.ncols, other.nrows)?;
        let mut c = Self::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let col = self.matvec(other.col(j))?;
            c.col_mut(j).copy_from_slice(&col);
        }
        Ok(c)
    }

    pub fn max_abs(&self) -> f64 {
        vector::norm_inf(&self.values)
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &DenseMatrix) -> Result<()> {
        check_dim("dense add rows", self.nrows, other.nrows)?;
        check_dim("dense add cols", self.ncols, other.ncols)?;
        vector::axpy(a, &other.values, &mut self.values);
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        vector::all_finite(&self.values)
    }
}

/// LU factors of a square dense matrix with row partial pivoting (`P A = L U`).
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    pivots: Vec<usize>,
}

impl DenseLu {
    /// Factorizes `a`; fails when a pivot drops below `1e-14 · ‖A‖_max`.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        check_dim("dense LU (square)", a.nrows, a.ncols)?;
        let n = a.nrows;
        let mut lu = a.clone();
        let mut pivots: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let threshold = 1e-14 * scale;
        for k in 0..n {
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..n {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) || scale == 0.0 {
                let min_max = (best, scale);
                return Err(Error::SingularReducedSystem {
                    theta: Vec::new(),
                    condition: if min_max.0 > 0.0 {
                        min_max.1 / min_max.0
                    } else {
                        f64::INFINITY
                    },
                });
            }
            if p != k {
                pivots.swap(k, p);
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, t);
                }
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let l = lu.get(i, k) / pivot;
                lu.set(i, k, l);
            }
            for j in k + 1..n {
                let ukj = lu.get(k, j);
                if ukj != 0.0 {
                    for i in k + 1..n {
                        let v = lu.get(i, j) - lu.get(i, k) * ukj;
                        lu.set(i, j, v);
                    }
                }
            }
        }
        Ok(Self { lu, pivots })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_dim("dense LU solve", n, b.len())?;
        let mut x: Vec<f64> = self.pivots.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..n {
                    x[i] -= self.lu.get(i, j) * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.lu.get(j, j);
            let xj = x[j];
            for i in 0..j {
                x[i] -= self.lu.get(i, j) * xj;
            }
        }
        Ok(x)
    }

    /// Ratio of largest to smallest pivot magnitude; a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let diag: Vec<f64> = (0..self.dim()).map(|i| self.lu.get(i, i).abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Solves `A x = b` by partial-pivoting LU followed by one refinement pass.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_dim("dense_solve rhs", a.nrows, b.len())?;
    let lu = DenseLu::new(a)?;
    let mut x = lu.solve(b)?;
    let ax = a.matvec(&x)?;
    let r = vector::sub(b, &ax);
    let dx = lu.solve(&r)?;
    vector::axpy(1.0, &dx, &mut x);
    Ok(x)
}
