//! Matrix-valued polynomials `sum_k C_k y^k` with rational coefficient
//! matrices.

use std::ops::{Add, Mul, Sub};

use num_traits::Zero;

use super::matrix::Matrix;
use super::poly::Poly;
use super::rational::{self, big, falling, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    // Ascending powers; never ends in a zero matrix.
    coeffs: Vec<Matrix>,
}

impl PolyMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: Vec::new(),
        }
    }

    pub fn from_coeffs(rows: usize, cols: usize, mut coeffs: Vec<Matrix>) -> Self {
        assert!(coeffs.iter().all(|c| c.rows() == rows && c.cols() == cols));
        while coeffs.last().is_some_and(Matrix::is_zero) {
            coeffs.pop();
        }
        Self { rows, cols, coeffs }
    }

    pub fn constant(m: Matrix) -> Self {
        Self::from_coeffs(m.rows(), m.cols(), vec![m])
    }

    pub fn from_entries(entries: &[Vec<Poly>]) -> Self {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        let deg = entries.iter().flatten().map(Poly::degree).max().unwrap_or(-1);
        let coeffs = (0..=deg)
            .map(|k| Matrix::from_fn(rows, cols, |i, j| entries[i][j].coeff(k as usize)))
            .collect();
        Self::from_coeffs(rows, cols, coeffs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    /// Coefficient matrix of `y^k`.
    pub fn coeff(&self, k: usize) -> Matrix {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.rows, self.cols))
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c[(i, j)].clone()).collect())
    }

    pub fn row(&self, i: usize) -> Vec<Poly> {
        (0..self.cols).map(|j| self.entry(i, j)).collect()
    }

    pub fn entries(&self) -> Vec<Vec<Poly>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn left_mul(&self, m: &Matrix) -> Self {
        Self::from_coeffs(m.rows(), self.cols, self.coeffs.iter().map(|c| m * c).collect())
    }

    pub fn right_mul(&self, m: &Matrix) -> Self {
        Self::from_coeffs(self.rows, m.cols(), self.coeffs.iter().map(|c| c * m).collect())
    }

    /// Multiplication by `y^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![Matrix::zeros(self.rows, self.cols); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::from_coeffs(self.rows, self.cols, coeffs)
    }

    pub fn derivative(&self, k: usize) -> Self {
        if self.coeffs.len() <= k {
            return Self::zero(self.rows, self.cols);
        }
        let coeffs = (k..self.coeffs.len())
            .map(|i| self.coeffs[i].scale(&big(falling(i as u64, k as u64))))
            .collect();
        Self::from_coeffs(self.rows, self.cols, coeffs)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.rows, self.cols, self.coeffs.iter().map(|m| m.scale(c)).collect())
    }

    pub fn eval(&self, y: &Rational) -> Matrix {
        self.coeffs
            .iter()
            .rev()
            .fold(Matrix::zeros(self.rows, self.cols), |acc, c| &acc.scale(y) + c)
    }

    pub fn eval_f64(&self, y: f64) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for c in self.coeffs.iter().rev() {
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = *v * y + rational::to_f64(&c[(i, j)]);
                }
            }
        }
        out
    }

    /// Substitutes `y -> t^k`.
    pub fn compose_power(&self, k: usize) -> Self {
        let mut coeffs = vec![Matrix::zeros(self.rows, self.cols); (self.coeffs.len().max(1) - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        Self::from_coeffs(self.rows, self.cols, coeffs)
    }

    /// Largest absolute coefficient over all entries and powers.
    pub fn max_abs(&self) -> Rational {
        self.coeffs
            .iter()
            .map(Matrix::max_abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl Add for &PolyMatrix {
    type Output = PolyMatrix;
    fn add(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyMatrix::from_coeffs(
            self.rows,
            self.cols,
            (0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect(),
        )
    }
}

impl Sub for &PolyMatrix {
    type Output = PolyMatrix;
    fn sub(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyMatrix::from_coeffs(
            self.rows,
            self.cols,
            (0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect(),
        )
    }
}

impl Mul for &PolyMatrix {
    type Output = PolyMatrix;
    fn mul(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, rhs.rows);
        if self.is_zero() || rhs.is_zero() {
            return PolyMatrix::zero(self.rows, rhs.cols);
        }
        let mut coeffs = vec![Matrix::zeros(self.rows, rhs.cols); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        PolyMatrix::from_coeffs(self.rows, rhs.cols, coeffs)
    }
}

impl Zero for PolyMatrix {
    fn zero() -> Self {
        PolyMatrix::zero(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl Add for PolyMatrix {
    type Output = PolyMatrix;
    fn add(self, rhs: PolyMatrix) -> PolyMatrix {
        &self + &rhs
    }
}
