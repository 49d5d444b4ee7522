//! Square banded operators, the truncations of semi-infinite recurrence
//! matrices.

use num_traits::{One, Zero};

use super::matrix::Matrix;
use super::rational::Rational;
use crate::error::{Error, Result};

/// `size x size` matrix whose entries vanish outside
/// `-lower <= col - row <= upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandedOperator {
    size: usize,
    lower: usize,
    upper: usize,
    // Row-major band storage; row i holds columns i-lower ..= i+upper.
    data: Vec<Rational>,
}

impl BandedOperator {
    pub fn zeros(size: usize, lower: usize, upper: usize) -> Self {
        Self {
            size,
            lower,
            upper,
            data: vec![Rational::zero(); size * (lower + upper + 1)],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut op = Self::zeros(size, 0, 0);
        for i in 0..size {
            op.set(i, i, Rational::one());
        }
        op
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.size || j >= self.size || j + self.lower < i || j > i + self.upper {
            return None;
        }
        Some(i * (self.lower + self.upper + 1) + (j + self.lower - i))
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        self.slot(i, j).is_some()
    }

    /// Entry `(i, j)`; structurally zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.slot(i, j)
            .map(|s| self.data[s].clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn get_ref(&self, i: usize, j: usize) -> Option<&Rational> {
        self.slot(i, j).map(|s| &self.data[s])
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        let s = self.slot(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band"));
        self.data[s] = v;
    }

    /// Columns of row `i` that lie inside the band.
    pub fn band_cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.size)
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    /// Fails with `BandViolation` if a nonzero entry lies outside the band.
    pub fn from_dense(m: &Matrix, lower: usize, upper: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("banded operator must be square".into()));
        }
        let mut op = Self::zeros(m.rows(), lower, upper);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = &m[(i, j)];
                if op.in_band(i, j) {
                    op.set(i, j, v.clone());
                } else if !v.is_zero() {
                    return Err(Error::BandViolation { row: i, col: j });
                }
            }
        }
        Ok(op)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.size, self.upper, self.lower);
        for i in 0..self.size {
            for j in self.band_cols(i) {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| self.band_cols(i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Product of two banded operators; the band of the result is the sum of
    /// the bands (capped by the size).
    pub fn mul(&self, rhs: &BandedOperator) -> Self {
        assert_eq!(self.size, rhs.size, "banded product size mismatch");
        let n = self.size;
        let lower = (self.lower + rhs.lower).min(n.saturating_sub(1));
        let upper = (self.upper + rhs.upper).min(n.saturating_sub(1));
        let mut out = Self::zeros(n, lower, upper);
        for i in 0..n {
            for k in self.band_cols(i) {
                let a = self.get_ref(i, k).expect("in band");
                if a.is_zero() {
                    continue;
                }
                for j in rhs.band_cols(k) {
                    let b = rhs.get_ref(k, j).expect("in band");
                    if b.is_zero() {
                        continue;
                    }
                    let s = out.slot(i, j).expect("product stays in summed band");
                    out.data[s] += a * b;
                }
            }
        }
        out
    }

    /// `self - c I`
    pub fn shift(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for i in 0..self.size {
            let v = out.get(i, i) - c;
            out.set(i, i, v);
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.size), |acc, _| acc.mul(self))
    }

    /// `diag(left) * self * diag(right)`
    pub fn scale_diag(&self, left: &[Rational], right: &[Rational]) -> Self {
        let mut out = self.clone();
        for i in 0..self.size {
            for j in self.band_cols(i) {
                let v = &left[i] * self.get(i, j) * &right[j];
                out.set(i, j, v);
            }
        }
        out
    }

    /// Leading principal truncation.
    pub fn truncate(&self, size: usize) -> Self {
        let mut out = Self::zeros(size, self.lower, self.upper);
        for i in 0..size {
            for j in out.band_cols(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::int;
    use proptest::prelude::*;

    fn arb_banded(n: usize) -> impl Strategy<Value = BandedOperator> {
        (0usize..3, 0usize..3).prop_flat_map(move |(l, u)| {
            proptest::collection::vec(-5i64..5, n * (l + u + 1)).prop_map(move |v| {
                let mut op = BandedOperator::zeros(n, l, u);
                let mut it = v.into_iter();
                for i in 0..n {
                    for j in op.band_cols(i) {
                        op.set(i, j, int(it.next().unwrap()));
                    }
                }
                op
            })
        })
    }

    fn arb_pair() -> impl Strategy<Value = (BandedOperator, BandedOperator)> {
        (2usize..9).prop_flat_map(|n| (arb_banded(n), arb_banded(n)))
    }

    #[test]
    fn outside_band_is_zero() {
        let mut op = BandedOperator::zeros(4, 1, 0);
        op.set(1, 0, int(3));
        assert_eq!(op.get(0, 3), int(0));
        assert_eq!(op.transpose().get(0, 1), int(3));
        let dense = Matrix::from_ints(&[&[1, 0], &[0, 1]]);
        assert!(BandedOperator::from_dense(&dense, 0, 0).is_ok());
        let dense = Matrix::from_ints(&[&[1, 2], &[0, 1]]);
        assert_eq!(
            BandedOperator::from_dense(&dense, 0, 0),
            Err(Error::BandViolation { row: 0, col: 1 })
        );
    }

    proptest! {
        #[test]
        fn product_matches_dense_and_band((a, b) in arb_pair()) {
            let p = a.mul(&b);
            prop_assert_eq!(p.to_dense(), &a.to_dense() * &b.to_dense());
            prop_assert!(p.lower_bandwidth() <= a.lower_bandwidth() + b.lower_bandwidth());
            prop_assert!(p.upper_bandwidth() <= a.upper_bandwidth() + b.upper_bandwidth());
            prop_assert!(BandedOperator::from_dense(&p.to_dense(), p.lower_bandwidth(), p.upper_bandwidth()).is_ok());
        }
    }
}
