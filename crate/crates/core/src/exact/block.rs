//! Block tridiagonal operators with square blocks of a fixed size.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Truncation of a semi-infinite block tridiagonal matrix with `len` block
/// rows. `sub[k]` sits at block position `(k + 1, k)` and `sup[k]` at
/// `(k, k + 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockTridiagonal {
    block_size: usize,
    pub diag: Vec<Matrix>,
    pub sub: Vec<Matrix>,
    pub sup: Vec<Matrix>,
}

impl BlockTridiagonal {
    pub fn new(diag: Vec<Matrix>, sub: Vec<Matrix>, sup: Vec<Matrix>) -> Result<Self> {
        let block_size = diag.first().map_or(0, Matrix::rows);
        let len = diag.len();
        let off = len.saturating_sub(1);
        if sub.len() != off || sup.len() != off {
            return Err(Error::DimensionMismatch(format!(
                "{len} diagonal blocks need {off} off-diagonal blocks, got {} and {}",
                sub.len(),
                sup.len()
            )));
        }
        let ok = diag
            .iter()
            .chain(&sub)
            .chain(&sup)
            .all(|b| b.rows() == block_size && b.cols() == block_size);
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "all blocks must be {block_size}x{block_size}"
            )));
        }
        Ok(Self {
            block_size,
            diag,
            sub,
            sup,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Block `(i, j)`; zero outside the three diagonals.
    pub fn block(&self, i: usize, j: usize) -> Matrix {
        let b = self.block_size;
        if i == j {
            self.diag[i].clone()
        } else if i == j + 1 {
            self.sub[j].clone()
        } else if j == i + 1 {
            self.sup[i].clone()
        } else {
            Matrix::zeros(b, b)
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let b = self.block_size;
        let n = self.len();
        let mut m = Matrix::zeros(n * b, n * b);
        for i in 0..n {
            for j in i.saturating_sub(1)..(i + 2).min(n) {
                m.set_block(i * b, j * b, &self.block(i, j));
            }
        }
        m
    }

    /// Rebuilds from a dense matrix; errors if anything lies outside the
    /// block band.
    pub fn from_dense(m: &Matrix, block_size: usize) -> Result<Self> {
        let b = block_size;
        if !m.rows().is_multiple_of(b) || !m.is_square() {
            return Err(Error::DimensionMismatch(
                "dense matrix is not a whole number of blocks".into(),
            ));
        }
        let n = m.rows() / b;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if (i / b).abs_diff(j / b) > 1 && !num_traits::Zero::is_zero(&m[(i, j)]) {
                    return Err(Error::BandViolation { row: i, col: j });
                }
            }
        }
        let diag = (0..n).map(|k| m.block(k * b, k * b, b, b)).collect();
        let sub = (1..n).map(|k| m.block(k * b, (k - 1) * b, b, b)).collect();
        let sup = (1..n).map(|k| m.block((k - 1) * b, k * b, b, b)).collect();
        Self::new(diag, sub, sup)
    }

    /// Product, which must again be block tridiagonal (true for a
    /// lower/upper bidiagonal pair).
    pub fn mul(&self, rhs: &BlockTridiagonal) -> Result<Self> {
        if self.block_size != rhs.block_size || self.len() != rhs.len() {
            return Err(Error::DimensionMismatch("block product shape mismatch".into()));
        }
        Self::from_dense(&(&self.to_dense() * &rhs.to_dense()), self.block_size)
    }

    /// Leading `len` block rows and columns.
    pub fn truncate(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self {
            block_size: self.block_size,
            diag: self.diag[..len].to_vec(),
            sub: self.sub[..len.saturating_sub(1)].to_vec(),
            sup: self.sup[..len.saturating_sub(1)].to_vec(),
        }
    }
}
