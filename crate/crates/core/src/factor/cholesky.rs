//! Up-looking sparse Cholesky `P A Pᵀ = L Lᵀ`.
//!
//! The symbolic phase (ordering, elimination tree, column pointers of `L`) is
//! kept separate so a matrix with the same pattern can be refactorised.

use crate::error::{check_dim, Error, Result};
use crate::factor::ordering::{rcm_order, Permutation};
use crate::la::SparseMatrix;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct CholeskySymbolic {
    n: usize,
    perm: Permutation,
    parent: Vec<usize>,
    col_starts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    symbolic: CholeskySymbolic,
    // CSC storage of L: diagonal first in every column, rows increasing
    row_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Rows of the lower triangle of `c`, entries with column ≤ row.
fn lower_row(c: &SparseMatrix, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    let (cols, vals) = c.row(k);
    cols.iter()
        .zip(vals)
        .take_while(move |(&j, _)| j <= k)
        .map(|(&j, &v)| (j, v))
}

fn etree(c: &SparseMatrix) -> Vec<usize> {
    let n = c.nrows();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for (j, _) in lower_row(c, k) {
            let mut i = j;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (off-diagonal), in topological order, written
/// to `stack[top..]`; returns `top`.
fn ereach(
    c: &SparseMatrix,
    k: usize,
    parent: &[usize],
    stack: &mut [usize],
    mark: &mut [usize],
) -> usize {
    let n = c.nrows();
    let mut top = n;
    mark[k] = k;
    let mut path = Vec::new();
    for (j, _) in lower_row(c, k) {
        let mut i = j;
        path.clear();
        while mark[i] != k {
            path.push(i);
            mark[i] = k;
            i = parent[i];
        }
        while let Some(v) = path.pop() {
            top -= 1;
            stack[top] = v;
        }
    }
    top
}

impl CholeskySymbolic {
    pub fn analyze(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput("cholesky needs a square matrix".into()));
        }
        let perm = rcm_order(a);
        Self::with_permutation(a, perm)
    }

    pub fn with_permutation(a: &SparseMatrix, perm: Permutation) -> Result<Self> {
        let n = a.nrows();
        check_dim("cholesky permutation", n, perm.len())?;
        let c = a.permute_symmetric(perm.perm());
        let parent = etree(&c);
        let mut counts = vec![1usize; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![NONE; n];
        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut stack, &mut mark);
            for &j in &stack[top..n] {
                counts[j] += 1;
            }
        }
        let mut col_starts = vec![0usize; n + 1];
        for j in 0..n {
            col_starts[j + 1] = col_starts[j] + counts[j];
        }
        Ok(Self {
            n,
            perm,
            parent,
            col_starts,
        })
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn nnz_lower(&self) -> usize {
        self.col_starts[self.n]
    }

    /// Numeric factorisation of `a`, whose pattern must be contained in the analysed one.
    pub fn factor(&self, a: &SparseMatrix) -> Result<CholeskyFactor> {
        let n = self.n;
        check_dim("cholesky numeric", n, a.nrows())?;
        let c = a.permute_symmetric(self.perm.perm());
        let nnz = self.nnz_lower();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut next = self.col_starts[..n].to_vec();
        let mut x = vec![0.0; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![NONE; n];
        for k in 0..n {
            let top = ereach(&c, k, &self.parent, &mut stack, &mut mark);
            for (j, v) in lower_row(&c, k) {
                x[j] = v;
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..n] {
                let lki = x[i] / lx[self.col_starts[i]];
                x[i] = 0.0;
                for p in self.col_starts[i] + 1..next[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                if p >= self.col_starts[i + 1] {
                    return Err(Error::InvalidInput(
                        "matrix pattern exceeds the analysed pattern".into(),
                    ));
                }
                li[p] = k;
                lx[p] = lki;
                next[i] += 1;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    column: self.perm.perm()[k],
                    pivot: d,
                });
            }
            let p = next[k];
            li[p] = k;
            lx[p] = d.sqrt();
            next[k] += 1;
        }
        Ok(CholeskyFactor {
            symbolic: self.clone(),
            row_indices: li,
            values: lx,
        })
    }
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn permutation(&self) -> &Permutation {
        &self.symbolic.perm
    }

    /// `L` as a CSR matrix (in the permuted numbering).
    pub fn lower(&self) -> SparseMatrix {
        let n = self.dim();
        // CSC of L is CSR of Lᵀ
        SparseMatrix::from_csr(
            n,
            n,
            self.symbolic.col_starts.clone(),
            self.row_indices.clone(),
            self.values.clone(),
        )
        .expect("cholesky columns are sorted")
        .transpose()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let cs = &self.symbolic.col_starts;
        let mut y = self.symbolic.perm.gather(b);
        for j in 0..n {
            y[j] /= self.values[cs[j]];
            let yj = y[j];
            for p in cs[j] + 1..cs[j + 1] {
                y[self.row_indices[p]] -= self.values[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in cs[j] + 1..cs[j + 1] {
                s -= self.values[p] * y[self.row_indices[p]];
            }
            y[j] = s / self.values[cs[j]];
        }
        self.symbolic.perm.scatter(&y)
    }
}

/// Analyse and factorise in one call.
pub fn chol_factor(a: &SparseMatrix) -> Result<CholeskyFactor> {
    CholeskySymbolic::analyze(a)?.factor(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::vector;

    fn laplacian_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn diagonal_factor() {
        let f = chol_factor(&SparseMatrix::diagonal(&[4.0, 9.0])).unwrap();
        let l = f.lower();
        // diagonal matrices are kept in natural order
        assert_eq!(l.to_dense().values(), &[2.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn laplacian_reproduced() {
        let a = laplacian_1d(5);
        let f = chol_factor(&a).unwrap();
        let l = f.lower().to_dense();
        let llt = l.matmul(&l.transpose()).unwrap();
        let c = a.permute_symmetric(f.permutation().perm()).to_dense();
        for i in 0..5 {
            for j in 0..5 {
                assert!((llt.get(i, j) - c.get(i, j)).abs() <= 1e-14);
            }
        }
        let b = vec![1.0, 0.0, -2.0, 3.0, 0.5];
        let x = f.solve(&b);
        let r = vector::sub(&a.spmv(&x).unwrap(), &b);
        assert!(vector::norm(&r) <= 1e-13 * vector::norm(&b));
    }

    #[test]
    fn indefinite_rejected() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(chol_factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn refactor_same_pattern() {
        let a = laplacian_1d(8);
        let sym = CholeskySymbolic::analyze(&a).unwrap();
        let mut a2 = a.clone();
        for v in a2.values_mut() {
            *v *= 3.0;
        }
        let f1 = sym.factor(&a).unwrap();
        let f2 = sym.factor(&a2).unwrap();
        let b = vec![1.0; 8];
        let x1 = f1.solve(&b);
        let x2 = f2.solve(&b);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - 3.0 * q).abs() <= 1e-12);
        }
    }
}
