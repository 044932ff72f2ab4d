//! SPD weights `M` defining the inner products `(x, y)_M = (Mx, y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::la::{vector, DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Default)]
pub enum SpdWeight {
    #[default]
    Identity,
    Matrix(SparseMatrix),
}

impl SpdWeight {
    /// Wraps `m` after checking symmetry and positivity on a handful of random vectors.
    pub fn matrix(m: SparseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput("weight matrix must be square".into()));
        }
        if m.asymmetry() > 1e-12 * m.max_abs() {
            return Err(Error::InvalidInput("weight matrix is not symmetric".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..4 {
            let x: Vec<f64> = (0..m.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if !(m.bilinear(&x, &x) > 0.0) {
                return Err(Error::InvalidInput("weight matrix is not positive definite".into()));
            }
        }
        Ok(SpdWeight::Matrix(m))
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, SpdWeight::Identity)
    }

    /// `M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SpdWeight::Identity => x.to_vec(),
            SpdWeight::Matrix(m) => {
                let mut y = vec![0.0; m.nrows()];
                m.spmv_into(x, &mut y);
                y
            }
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SpdWeight::Identity => None,
            SpdWeight::Matrix(m) => Some(m.nrows()),
        }
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("m_inner", x.len(), y.len())?;
        if let Some(n) = self.dim() {
            check_dim("m_inner weight", n, x.len())?;
        }
        Ok(match self {
            SpdWeight::Identity => vector::dot(x, y),
            SpdWeight::Matrix(m) => m.bilinear(y, x),
        })
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.inner(x, x)?.max(0.0).sqrt())
    }
}

/// `(M x, y)`; the identity weight gives the Euclidean dot product.
pub fn m_inner(m: &SpdWeight, x: &[f64], y: &[f64]) -> Result<f64> {
    m.inner(x, y)
}

/// Default relative drop tolerance for rank-revealing orthonormalisation.
pub const DEFAULT_DROP_TOL: f64 = 1e-10;

/// M-orthonormalises `cols` by modified Gram–Schmidt with one reorthogonalisation pass.
///
/// A vector is dropped when its M-norm after projection falls below
/// `drop_tol` times its original M-norm. Returns the basis and its rank.
pub fn gram_schmidt_m(cols: &[Vec<f64>], m: &SpdWeight, drop_tol: f64) -> Result<(DenseMatrix, usize)> {
    let (q, kept) = gram_schmidt_m_indexed(cols, m, drop_tol)?;
    Ok((q, kept.len()))
}

/// As [`gram_schmidt_m`], also reporting which inputs survived.
pub fn gram_schmidt_m_indexed(
    cols: &[Vec<f64>],
    m: &SpdWeight,
    drop_tol: f64,
) -> Result<(DenseMatrix, Vec<usize>)> {
    let n = cols
        .first()
        .ok_or_else(|| Error::InvalidInput("gram_schmidt_m needs at least one vector".into()))?
        .len();
    if let Some(d) = m.dim() {
        check_dim("gram_schmidt_m weight", d, n)?;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut weighted: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (idx, c) in cols.iter().enumerate() {
        check_dim("gram_schmidt_m column", n, c.len())?;
        let original = vector::dot(&m.apply(c), c).max(0.0).sqrt();
        if original == 0.0 || !original.is_finite() {
            continue;
        }
        let mut v = c.clone();
        for _pass in 0..2 {
            for (q, mq) in basis.iter().zip(&weighted) {
                let h = vector::dot(&v, mq);
                vector::axpy(-h, q, &mut v);
            }
        }
        let mv = m.apply(&v);
        let nrm = vector::dot(&mv, &v).max(0.0).sqrt();
        if nrm <= drop_tol * original {
            continue;
        }
        let inv = 1.0 / nrm;
        basis.push(v.iter().map(|x| x * inv).collect());
        weighted.push(mv.iter().map(|x| x * inv).collect());
        kept.push(idx);
    }
    Ok((DenseMatrix::from_columns(n, &basis)?, kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inner() {
        assert_eq!(m_inner(&SpdWeight::Identity, &[3.0, 4.0], &[3.0, 4.0]).unwrap(), 25.0);
    }

    #[test]
    fn diagonal_weight() {
        let m = SpdWeight::matrix(SparseMatrix::diagonal(&[1.0, 2.0])).unwrap();
        assert_eq!(m_inner(&m, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 3.0);
        assert!(m_inner(&m, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn rejects_non_spd() {
        assert!(SpdWeight::matrix(SparseMatrix::diagonal(&[1.0, -2.0])).is_err());
        let skew = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(SpdWeight::matrix(skew).is_err());
    }

    #[test]
    fn orthonormalises_unit_vectors() {
        let e1 = vec![1.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0];
        let (q, r) = gram_schmidt_m(&[e1.clone(), e2.clone()], &SpdWeight::Identity, 1e-10).unwrap();
        assert_eq!(r, 2);
        assert_eq!(q.col(0), e1.as_slice());
        assert_eq!(q.col(1), e2.as_slice());
    }

    #[test]
    fn duplicates_and_zeros_dropped() {
        let e1 = vec![1.0, 0.0];
        let (_, r) = gram_schmidt_m(&[e1.clone(), e1], &SpdWeight::Identity, 1e-10).unwrap();
        assert_eq!(r, 1);
        let (q, r) = gram_schmidt_m(&[vec![0.0, 0.0]], &SpdWeight::Identity, 1e-10).unwrap();
        assert_eq!(r, 0);
        assert_eq!(q.ncols(), 0);
    }
}
