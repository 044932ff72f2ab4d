//! Left-looking sparse LU with partial pivoting (Gilbert–Peierls).
//!
//! Columns are visited in reverse Cuthill–McKee order of the symmetrised
//! pattern; rows are chosen by partial pivoting, preferring the diagonal on ties.
//! The result satisfies `P_r A Q = L U` with unit lower `L`.

use crate::error::{check_dim, Error, Result};
use crate::factor::ordering::{rcm_order, Permutation};
use crate::la::SparseMatrix;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    col_perm: Permutation,
    // row_pinv[original row] = pivot step
    row_pinv: Vec<usize>,
    // CSC, unit diagonal stored first in each column, rows in pivot numbering
    l_starts: Vec<usize>,
    l_rows: Vec<usize>,
    l_vals: Vec<f64>,
    // CSC, diagonal stored last in each column
    u_starts: Vec<usize>,
    u_rows: Vec<usize>,
    u_vals: Vec<f64>,
}

struct Reach {
    mark: Vec<usize>,
    stack: Vec<usize>,
    pstack: Vec<usize>,
    out: Vec<usize>,
}

impl Reach {
    fn new(n: usize) -> Self {
        Self {
            mark: vec![NONE; n],
            stack: Vec::with_capacity(n),
            pstack: Vec::with_capacity(n),
            out: vec![0; n],
        }
    }

    /// Depth-first search from `start` in the graph of the partial `L`; nodes are
    /// original row indices, and a pivoted row `j` links to the rows of column `pinv[j]`.
    fn dfs(
        &mut self,
        start: usize,
        stamp: usize,
        mut top: usize,
        l_starts: &[usize],
        l_rows: &[usize],
        pinv: &[usize],
    ) -> usize {
        self.stack.clear();
        self.pstack.clear();
        self.stack.push(start);
        self.pstack.push(NONE);
        while let Some(&j) = self.stack.last() {
            let head = self.stack.len() - 1;
            let col = pinv[j];
            if self.mark[j] != stamp {
                self.mark[j] = stamp;
                self.pstack[head] = if col == NONE { 0 } else { l_starts[col] };
            }
            let end = if col == NONE { 0 } else { l_starts[col + 1] };
            let mut descended = false;
            let mut p = self.pstack[head];
            while p < end {
                let i = l_rows[p];
                p += 1;
                if self.mark[i] != stamp {
                    self.pstack[head] = p;
                    self.stack.push(i);
                    self.pstack.push(NONE);
                    descended = true;
                    break;
                }
            }
            if !descended {
                self.pstack[head] = end;
                self.stack.pop();
                self.pstack.pop();
                top -= 1;
                self.out[top] = j;
            }
        }
        top
    }
}

impl LuFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column_permutation(&self) -> &Permutation {
        &self.col_perm
    }

    /// `p[k]` = original row chosen as the `k`-th pivot.
    pub fn row_pivots(&self) -> Vec<usize> {
        let mut p = vec![0; self.n];
        for (row, &k) in self.row_pinv.iter().enumerate() {
            p[k] = row;
        }
        p
    }

    pub fn lower(&self) -> SparseMatrix {
        csc_to_csr(self.n, &self.l_starts, &self.l_rows, &self.l_vals)
    }

    pub fn upper(&self) -> SparseMatrix {
        csc_to_csr(self.n, &self.u_starts, &self.u_rows, &self.u_vals)
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.row_pinv[i]] = bi;
        }
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l_starts[j] + 1..self.l_starts[j + 1] {
                    y[self.l_rows[p]] -= self.l_vals[p] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            let last = self.u_starts[j + 1] - 1;
            y[j] /= self.u_vals[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u_starts[j]..last {
                    y[self.u_rows[p]] -= self.u_vals[p] * yj;
                }
            }
        }
        self.col_perm.scatter(&y)
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut w = self.col_perm.gather(b);
        for j in 0..n {
            let last = self.u_starts[j + 1] - 1;
            let mut s = w[j];
            for p in self.u_starts[j]..last {
                s -= self.u_vals[p] * w[self.u_rows[p]];
            }
            w[j] = s / self.u_vals[last];
        }
        for j in (0..n).rev() {
            let mut s = w[j];
            for p in self.l_starts[j] + 1..self.l_starts[j + 1] {
                s -= self.l_vals[p] * w[self.l_rows[p]];
            }
            w[j] = s;
        }
        (0..n).map(|i| w[self.row_pinv[i]]).collect()
    }
}

fn csc_to_csr(n: usize, starts: &[usize], rows: &[usize], vals: &[f64]) -> SparseMatrix {
    let mut t = Vec::with_capacity(vals.len());
    for j in 0..n {
        for p in starts[j]..starts[j + 1] {
            t.push((rows[p], j, vals[p]));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).expect("factor indices are in range")
}

pub fn lu_factor(a: &SparseMatrix) -> Result<LuFactor> {
    if !a.is_square() {
        return Err(Error::InvalidInput("lu needs a square matrix".into()));
    }
    let q = rcm_order(a);
    lu_factor_with_order(a, q)
}

pub fn lu_factor_with_order(a: &SparseMatrix, q: Permutation) -> Result<LuFactor> {
    let n = a.nrows();
    check_dim("lu column order", n, q.len())?;
    // rows of Aᵀ are the columns of A
    let at = a.transpose();
    let mut pinv = vec![NONE; n];
    let mut l_starts = Vec::with_capacity(n + 1);
    let mut u_starts = Vec::with_capacity(n + 1);
    let mut l_rows = Vec::new();
    let mut l_vals = Vec::new();
    let mut u_rows = Vec::new();
    let mut u_vals = Vec::new();
    let mut x = vec![0.0; n];
    let mut reach = Reach::new(n);

    for k in 0..n {
        l_starts.push(l_rows.len());
        u_starts.push(u_rows.len());
        let col = q.perm()[k];
        let (arows, avals) = at.row(col);

        let mut top = n;
        for &i in arows {
            if reach.mark[i] != k {
                top = reach.dfs(i, k, top, &l_starts, &l_rows, &pinv);
            }
        }
        for &i in &reach.out[top..n] {
            x[i] = 0.0;
        }
        for (&i, &v) in arows.iter().zip(avals) {
            x[i] = v;
        }
        for idx in top..n {
            let j = reach.out[idx];
            let jcol = pinv[j];
            if jcol == NONE {
                continue;
            }
            let xj = x[j];
            // pivoted columns are complete, so l_starts[jcol + 1] exists
            for p in l_starts[jcol] + 1..l_starts[jcol + 1] {
                x[l_rows[p]] -= l_vals[p] * xj;
            }
        }

        let mut ipiv = NONE;
        let mut best = -1.0_f64;
        for &i in &reach.out[top..n] {
            if pinv[i] == NONE {
                let v = x[i].abs();
                if v > best {
                    best = v;
                    ipiv = i;
                }
            } else {
                u_rows.push(pinv[i]);
                u_vals.push(x[i]);
            }
        }
        if ipiv == NONE || !(best > 0.0) || !best.is_finite() {
            return Err(Error::Singular { column: col });
        }
        if pinv[col] == NONE && x[col].abs() >= best {
            ipiv = col;
        }
        let pivot = x[ipiv];
        u_rows.push(k);
        u_vals.push(pivot);
        pinv[ipiv] = k;
        l_rows.push(ipiv);
        l_vals.push(1.0);
        for &i in &reach.out[top..n] {
            if pinv[i] == NONE {
                l_rows.push(i);
                l_vals.push(x[i] / pivot);
            }
            x[i] = 0.0;
        }
    }
    l_starts.push(l_rows.len());
    u_starts.push(u_rows.len());
    for r in l_rows.iter_mut() {
        *r = pinv[*r];
    }
    Ok(LuFactor {
        n,
        col_perm: q,
        row_pinv: pinv,
        l_starts,
        l_rows,
        l_vals,
        u_starts,
        u_rows,
        u_vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::vector;

    #[test]
    fn permutation_matrix_exact() {
        let a = SparseMatrix::from_triplets(3, 3, &[(0, 2, 1.0), (1, 0, 1.0), (2, 1, 1.0)]).unwrap();
        let f = lu_factor(&a).unwrap();
        let b = vec![1.0, 2.0, 3.0];
        let x = f.solve(&b);
        assert_eq!(a.spmv(&x).unwrap(), b);
        let xt = f.solve_transpose(&b);
        assert_eq!(a.spmv_transpose(&xt).unwrap(), b);
    }

    #[test]
    fn singular_detected() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(matches!(lu_factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn nonsymmetric_small() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1e-3), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 1.0), (1, 2, -1.0), (2, 1, 4.0), (2, 2, 5.0)],
        )
        .unwrap();
        let f = lu_factor(&a).unwrap();
        let b = vec![1.0, -1.0, 2.0];
        let x = f.solve(&b);
        assert!(vector::norm(&vector::sub(&a.spmv(&x).unwrap(), &b)) <= 1e-13);
        let xt = f.solve_transpose(&b);
        assert!(vector::norm(&vector::sub(&a.spmv_transpose(&xt).unwrap(), &b)) <= 1e-13);
    }
}
