//! Dense rational matrices and the exact solvers built on them.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::{self, big, int, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].is_zero()))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Largest absolute entry, zero for an empty matrix.
    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(Signed::abs).max().unwrap_or_else(Rational::zero)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rational::to_f64).collect())
            .collect()
    }

    /// Leading principal `k x k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, k, |i, j| self[(i, j)].clone())
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut ech = RowEchelon::new(2 * n);
        for i in 0..n {
            let mut row = self.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            ech.push(row);
        }
        if ech.pivots().iter().take_while(|&&p| p < n).count() < n {
            return Err(Error::SingularMatrix);
        }
        Ok(Self::from_fn(n, n, |i, j| ech.rows()[i][n + j].clone()))
    }

    pub fn determinant(&self) -> Rational {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[(i, k)].is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                det = -det;
            }
            let piv = a[(k, k)].clone();
            det *= &piv;
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = &a[(i, k)] / &piv;
                for j in k..n {
                    let t = &f * &a[(k, j)];
                    a[(i, j)] -= t;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Solves `a x = b` exactly.
///
/// Rows of the augmented system are cleared of denominators and reduced by
/// fraction-free (Bareiss) elimination, so every intermediate value is an
/// integer minor of the input; only the final back substitution divides.
pub fn solve_linear(a: &Matrix, b: &[Rational]) -> Result<Vec<Rational>> {
    if !a.is_square() || b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let n = a.rows();
    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = a.row(i).to_vec();
            row.push(b[i].clone());
            let den = rational::common_denominator(&row);
            row.iter().map(|v| (v * big(den.clone())).to_integer()).collect()
        })
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero()).ok_or(Error::SingularMatrix)?;
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }

    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = big(m[i][n].clone());
        for j in i + 1..n {
            acc -= big(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / big(m[i][i].clone());
    }
    Ok(x)
}

/// Exact basis of `{x : a x = 0}`; empty when the nullspace is trivial.
pub fn nullspace(a: &Matrix) -> Vec<Vec<Rational>> {
    let mut ech = RowEchelon::new(a.cols());
    for i in 0..a.rows() {
        ech.push(a.row(i).to_vec());
    }
    ech.nullspace()
}

/// Incrementally maintained reduced row echelon form.
///
/// Rows are pushed one at a time and immediately reduced against the current
/// pivots, so tall systems only ever store `rank` rows.
#[derive(Clone, Debug)]
pub struct RowEchelon {
    cols: usize,
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// Adds a row; returns `true` when it raised the rank.
    pub fn push(&mut self, mut row: Vec<Rational>) -> bool {
        assert_eq!(row.len(), self.cols);
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(r).skip(p) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        let Some(p) = row.iter().position(|v| !v.is_zero()) else {
            return false;
        };
        let inv = row[p].recip();
        for v in row.iter_mut().skip(p) {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        for r in &mut self.rows {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, y) in r.iter_mut().zip(&row).skip(p) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, row);
        true
    }

    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (r, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -&r[f];
                }
                v
            })
            .collect()
    }

    /// Treats the last column as the right-hand side and returns one solution
    /// (free variables set to zero), or `None` when the system is inconsistent.
    pub fn particular_solution(&self) -> Option<Vec<Rational>> {
        let n = self.cols - 1;
        if self.pivots.last() == Some(&n) {
            return None;
        }
        let mut x = vec![Rational::zero(); n];
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            x[p] = r[n].clone();
        }
        Some(x)
    }
}

/// `L D L^T` of a symmetric matrix without pivoting.
///
/// Returns the unit lower factor and the pivots. Fails with `Degenerate(k)`
/// at the first zero pivot; signs of nonzero pivots are not restricted.
pub fn ldlt(a: &Matrix) -> Result<(Matrix, Vec<Rational>)> {
    if !a.is_symmetric() {
        return Err(Error::DimensionMismatch("LDL^T of a non-symmetric matrix".into()));
    }
    let n = a.rows();
    let mut l = Matrix::identity(n);
    let mut d: Vec<Rational> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = a[(j, j)].clone();
        for k in 0..j {
            if !l[(j, k)].is_zero() {
                dj -= &l[(j, k)] * &l[(j, k)] * &d[k];
            }
        }
        if dj.is_zero() {
            return Err(Error::Degenerate(j));
        }
        for i in j + 1..n {
            let mut v = a[(i, j)].clone();
            for k in 0..j {
                if !l[(i, k)].is_zero() && !l[(j, k)].is_zero() {
                    v -= &l[(i, k)] * &l[(j, k)] * &d[k];
                }
            }
            l[(i, j)] = v / &dj;
        }
        d.push(dj);
    }
    Ok((l, d))
}

/// Exact positive semi-definiteness test by symmetric diagonal pivoting.
pub fn is_positive_semidefinite(a: &Matrix) -> bool {
    if !a.is_symmetric() {
        return false;
    }
    let mut m = a.clone();
    let mut active: Vec<usize> = (0..a.rows()).collect();
    while !active.is_empty() {
        // Pick the largest remaining diagonal entry.
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|x, y| m[(*x.1, *x.1)].cmp(&m[(*y.1, *y.1)]))
            .expect("non-empty");
        let piv = m[(p, p)].clone();
        if piv.is_negative() {
            return false;
        }
        if piv.is_zero() {
            // All remaining diagonals are <= 0; PSD forces the rest to vanish.
            return active.iter().all(|&i| active.iter().all(|&j| m[(i, j)].is_zero()));
        }
        active.remove(pos);
        for &i in &active {
            let f = &m[(i, p)] / &piv;
            if f.is_zero() {
                continue;
            }
            for &j in &active {
                let t = &f * &m[(p, j)];
                m[(i, j)] -= t;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use proptest::prelude::*;

    #[test]
    fn solve_examples() {
        let a = Matrix::from_ints(&[&[1, 1], &[1, 3]]);
        assert_eq!(
            solve_linear(&a, &[int(1), int(0)]).unwrap(),
            vec![rat(3, 2), rat(-1, 2)]
        );
        let id = Matrix::identity(3);
        let b = vec![int(1), int(2), int(3)];
        assert_eq!(solve_linear(&id, &b).unwrap(), b);
        assert_eq!(
            solve_linear(&Matrix::from_ints(&[&[2]]), &[int(5)]).unwrap(),
            vec![rat(5, 2)]
        );
        let sing = Matrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(solve_linear(&sing, &[int(1), int(1)]), Err(Error::SingularMatrix));
    }

    #[test]
    fn nullspace_examples() {
        assert!(nullspace(&Matrix::identity(2)).is_empty());
        assert_eq!(nullspace(&Matrix::zeros(1, 2)).len(), 2);
        let ns = nullspace(&Matrix::from_ints(&[&[1, 1]]));
        assert_eq!(ns, vec![vec![int(-1), int(1)]]);
    }

    #[test]
    fn inverse_and_determinant() {
        let a = Matrix::from_ints(&[&[2, 1], &[7, 4]]);
        assert_eq!(&a * &a.inverse().unwrap(), Matrix::identity(2));
        assert_eq!(a.determinant(), int(1));
        assert_eq!(
            Matrix::from_ints(&[&[1, 2], &[2, 4]]).inverse(),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn psd_and_ldlt() {
        assert!(is_positive_semidefinite(&Matrix::from_ints(&[&[0, 0], &[0, 1]])));
        assert!(is_positive_semidefinite(&Matrix::from_ints(&[&[1, 1], &[1, 1]])));
        assert!(!is_positive_semidefinite(&Matrix::from_ints(&[&[0, 1], &[1, 0]])));
        assert!(!is_positive_semidefinite(&Matrix::from_ints(&[&[1, 2], &[2, 1]])));
        assert!(!is_positive_semidefinite(&Matrix::from_ints(&[&[1, 2], &[3, 1]])));
        let a = Matrix::from_ints(&[&[4, 12, -16], &[12, 37, -43], &[-16, -43, 98]]);
        let (l, d) = ldlt(&a).unwrap();
        assert_eq!(d, vec![int(4), int(1), int(9)]);
        let dm = Matrix::diagonal(&d);
        assert_eq!(&(&l * &dm) * &l.transpose(), a);
    }

    fn arb_system() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (1usize..6).prop_flat_map(|n| {
            (
                proptest::collection::vec(-9i64..9, n * n),
                proptest::collection::vec(-9i64..9, n),
            )
        })
    }

    proptest! {
        #[test]
        fn solve_reproduces_rhs((entries, rhs) in arb_system()) {
            let n = rhs.len();
            let a = Matrix::from_fn(n, n, |i, j| int(entries[i * n + j]));
            let b: Vec<Rational> = rhs.iter().map(|&v| int(v)).collect();
            match solve_linear(&a, &b) {
                Ok(x) => prop_assert_eq!(a.mul_vec(&x), b),
                Err(e) => {
                    prop_assert_eq!(e, Error::SingularMatrix);
                    prop_assert!(a.determinant().is_zero());
                }
            }
        }

        #[test]
        fn nullspace_vectors_are_annihilated((entries, _rhs) in arb_system(), extra in 0usize..3) {
            let n = _rhs.len();
            let cols = n + extra;
            let a = Matrix::from_fn(n, cols, |i, j| int(entries[(i * cols + j) % entries.len()]));
            let ns = nullspace(&a);
            for v in &ns {
                prop_assert!(a.mul_vec(v).iter().all(Zero::is_zero));
            }
            let mut ech = RowEchelon::new(cols);
            for i in 0..n { ech.push(a.row(i).to_vec()); }
            prop_assert_eq!(ech.rank() + ns.len(), cols);
        }
    }
}
