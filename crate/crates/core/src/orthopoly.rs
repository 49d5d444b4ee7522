//! Monic orthogonal sequences for arbitrary bilinear forms and the recurrence
//! and connection operators extracted from them.
//!
//! Everything is kept in the monic convention, where all quantities are
//! rational. Orthonormal quantities involve square roots of norms; they are
//! exposed as [`SignedSquare`] values (exact square plus sign) and as floats.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::rational::{self, int, Rational};
use crate::exact::{BandedOperator, Poly};
use crate::measures::{gram_matrix, BilinearForm};

/// An orthonormal quantity represented by its exact square and its sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignedSquare {
    #[serde(with = "rational::serde_str")]
    pub square: Rational,
    pub sign: i8,
}

impl SignedSquare {
    pub fn new(square: Rational, sign: i8) -> Self {
        let sign = if square.is_zero() { 0 } else { sign };
        Self { square, sign }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), 0)
    }

    /// Orthonormal conjugate of a monic entry:
    /// `value * sqrt(col_norm / row_norm)`, squared.
    pub fn conjugate(value: &Rational, row_norm: &Rational, col_norm: &Rational) -> Self {
        let square = value * value * col_norm / row_norm;
        Self::new(square, rational::signum(value))
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * rational::to_f64(&self.square).sqrt()
    }

    /// Exact value when the square is a perfect rational square.
    pub fn exact(&self) -> Option<Rational> {
        rational::exact_sqrt(&self.square).map(|r| if self.sign < 0 { -r } else { r })
    }
}

/// Monic polynomials `s_0, s_1, ...` (degree `n` at index `n`), mutually
/// orthogonal under some form, with their squared norms.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicSequence {
    polys: Vec<Poly>,
    norms_sq: Vec<Rational>,
}

impl MonicSequence {
    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn norms_sq(&self) -> &[Rational] {
        &self.norms_sq
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn get(&self, n: usize) -> &Poly {
        &self.polys[n]
    }

    /// True when every squared norm is positive (an orthonormal version
    /// exists).
    pub fn is_positive(&self) -> bool {
        self.norms_sq.iter().all(Signed::is_positive)
    }

    /// Sequence re-expressed in the variable `t = x - c`, i.e. `s(t + c)`.
    pub fn recentered(&self, c: &Rational) -> Self {
        Self {
            polys: self.polys.iter().map(|p| p.shift_compose(c)).collect(),
            norms_sq: self.norms_sq.clone(),
        }
    }

    pub fn orthonormal(&self) -> OrthonormalView<'_> {
        OrthonormalView { base: self }
    }

    /// Coordinates of `p` in this basis (exact, triangular peeling).
    pub fn expand(&self, p: &Poly) -> Result<Vec<Rational>> {
        let deg = p.degree();
        if deg < 0 {
            return Ok(Vec::new());
        }
        let deg = deg as usize;
        if deg >= self.polys.len() {
            return Err(Error::InsufficientSequence {
                needed: deg + 1,
                available: self.polys.len(),
            });
        }
        let mut rem = p.clone();
        let mut out = vec![Rational::zero(); deg + 1];
        for d in (0..=deg).rev() {
            let c = rem.coeff(d);
            if !c.is_zero() {
                rem = &rem - &self.polys[d].scale(&c);
                out[d] = c;
            }
        }
        Ok(out)
    }

    /// Exact pairwise orthogonality under `form` for all members.
    pub fn check_orthogonal(&self, form: &dyn BilinearForm) -> Result<bool> {
        for n in 0..self.len() {
            if form.eval(&self.polys[n], &self.polys[n])? != self.norms_sq[n] {
                return Ok(false);
            }
            for m in 0..n {
                if !form.eval(&self.polys[n], &self.polys[m])?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Orthonormal view of a monic sequence, `s_n / ||s_n||`.
#[derive(Clone, Copy, Debug)]
pub struct OrthonormalView<'a> {
    base: &'a MonicSequence,
}

impl OrthonormalView<'_> {
    /// `1 / ||s_n||^2`
    pub fn scale_sq(&self, n: usize) -> Rational {
        self.base.norms_sq[n].recip()
    }

    /// Squared coefficient of `x^k` in the orthonormal `s_n`, with sign.
    pub fn coeff(&self, n: usize, k: usize) -> SignedSquare {
        let c = self.base.polys[n].coeff(k);
        SignedSquare::new(&c * &c * self.scale_sq(n), rational::signum(&c))
    }

    pub fn eval_f64(&self, n: usize, x: f64) -> f64 {
        self.base.polys[n].eval_f64(x) / rational::to_f64(&self.base.norms_sq[n]).sqrt()
    }
}

fn gram_schmidt(form: &dyn BilinearForm, n_max: usize, require_positive: bool) -> Result<MonicSequence> {
    let g = gram_matrix(form, n_max)?;
    let mut polys: Vec<Poly> = Vec::with_capacity(n_max + 1);
    let mut norms: Vec<Rational> = Vec::with_capacity(n_max + 1);
    // <x^n, s_k> = sum_j s_k[j] G[n][j]
    let pair = |row: usize, p: &Poly| -> Rational {
        p.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Rational::zero(), |acc, (j, c)| acc + c * &g[(row, j)])
    };
    for n in 0..=n_max {
        let mut s = Poly::monomial(n, Rational::one());
        for k in 0..n {
            let proj = pair(n, &polys[k]) / &norms[k];
            if !proj.is_zero() {
                s = &s - &polys[k].scale(&proj);
            }
        }
        let norm = s
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Rational::zero(), |acc, (i, c)| acc + c * pair(i, &s));
        if norm.is_zero() {
            return Err(if require_positive {
                Error::NotPositiveDefinite(n)
            } else {
                Error::Degenerate(n)
            });
        }
        if require_positive && norm.is_negative() {
            return Err(Error::NotPositiveDefinite(n));
        }
        polys.push(s);
        norms.push(norm);
    }
    Ok(MonicSequence { polys, norms_sq: norms })
}

/// Monic orthogonal polynomials of degree `0..=n_max` for a positive
/// definite form.
pub fn monic_sequence(form: &dyn BilinearForm, n_max: usize) -> Result<MonicSequence> {
    gram_schmidt(form, n_max, true)
}

/// Same as [`monic_sequence`] for quasi-definite forms: norms may be
/// negative, only a zero norm is an error.
pub fn monic_sequence_quasi(form: &dyn BilinearForm, n_max: usize) -> Result<MonicSequence> {
    gram_schmidt(form, n_max, false)
}

/// Monic three-term recurrence `x s_n = s_{n+1} + b_n s_n + lambda_n s_{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrix {
    pub b: Vec<Rational>,
    /// `lambda[0]` is zero by convention.
    pub lambda: Vec<Rational>,
}

impl JacobiMatrix {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Monic operator: `J[n][n-1] = lambda_n`, `J[n][n] = b_n`,
    /// `J[n][n+1] = 1`.
    pub fn monic_operator(&self) -> BandedOperator {
        let n = self.len();
        let mut op = BandedOperator::zeros(n, 1, 1);
        for i in 0..n {
            op.set(i, i, self.b[i].clone());
            if i > 0 {
                op.set(i, i - 1, self.lambda[i].clone());
            }
            if i + 1 < n {
                op.set(i, i + 1, Rational::one());
            }
        }
        op
    }

    /// Orthonormal (symmetric) entries: diagonal `b_n` and off-diagonal
    /// squares `lambda_n`.
    pub fn orthonormal_offdiag(&self, n: usize) -> SignedSquare {
        SignedSquare::new(self.lambda[n].clone(), 1)
    }

    pub fn orthonormal_f64(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = rational::to_f64(&self.b[i]);
            if i > 0 {
                let v = rational::to_f64(&self.lambda[i]).abs().sqrt();
                m[i][i - 1] = v;
                m[i - 1][i] = v;
            }
        }
        m
    }
}

/// Extracts the three-term recurrence of `seq` and verifies it exactly.
///
/// The result has `seq.len() - 1` rows (row `n` needs `s_{n+1}`).
pub fn jacobi_matrix(seq: &MonicSequence) -> Result<JacobiMatrix> {
    if seq.len() < 3 {
        return Err(Error::InsufficientSequence {
            needed: 3,
            available: seq.len(),
        });
    }
    let rows = seq.len() - 1;
    let mut b = Vec::with_capacity(rows);
    let mut lambda = Vec::with_capacity(rows);
    for n in 0..rows {
        // subleading coefficients: s_n = x^n + sigma_n x^{n-1} + ...
        let sigma = |k: usize| {
            if k == 0 {
                Rational::zero()
            } else {
                seq.polys[k].coeff(k - 1)
            }
        };
        b.push(sigma(n) - sigma(n + 1));
        lambda.push(if n == 0 {
            Rational::zero()
        } else {
            &seq.norms_sq[n] / &seq.norms_sq[n - 1]
        });
        let x = Poly::x();
        let mut residual = &(&x * &seq.polys[n]) - &seq.polys[n + 1];
        residual = &residual - &seq.polys[n].scale(&b[n]);
        if n > 0 {
            residual = &residual - &seq.polys[n - 1].scale(&lambda[n]);
        }
        if !residual.is_zero() {
            return Err(Error::IdentityViolated {
                location: format!("three-term recurrence at n = {n}"),
                residual: residual.to_string(),
            });
        }
    }
    Ok(JacobiMatrix { b, lambda })
}

/// Monic band matrix `H` of `(x - c)^{N+1} s_n = sum_k H_{n,k} s_k` together
/// with the squared norms needed for the orthonormal view.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedRecurrence {
    pub h: BandedOperator,
    pub norms_sq: Vec<Rational>,
    pub center: Rational,
    pub order: usize,
}

impl BandedRecurrence {
    pub fn size(&self) -> usize {
        self.h.size()
    }

    /// Orthonormal entry `h_{n,k}` as a signed square.
    pub fn orthonormal(&self, n: usize, k: usize) -> SignedSquare {
        SignedSquare::conjugate(&self.h.get(n, k), &self.norms_sq[n], &self.norms_sq[k])
    }

    /// `H D` with `D = diag(||s_n||^2)`; equals the Gram matrix of
    /// `(x - c)^{N+1}` in the `s` basis and is symmetric.
    pub fn symmetrized(&self) -> BandedOperator {
        let ones = vec![Rational::one(); self.size()];
        self.h.scale_diag(&ones, &self.norms_sq[..self.size()])
    }
}

/// Builds `H` by expanding `(x - c)^{N+1} s_n` in the basis `s`.
///
/// Fails with `SymmetryViolated` when an entry outside the band
/// `|n - k| <= N + 1` is nonzero (the form does not make multiplication by
/// `(x - c)^{N+1}` symmetric).
pub fn banded_recurrence(seq: &MonicSequence, center: &Rational, order: usize) -> Result<BandedRecurrence> {
    let band = order + 1;
    if seq.len() <= band {
        return Err(Error::InsufficientSequence {
            needed: band + 1,
            available: seq.len(),
        });
    }
    let size = seq.len() - band;
    let weight = Poly::shifted_power(center, band);
    let mut h = BandedOperator::zeros(size, band, band);
    for n in 0..size {
        let coords = seq.expand(&(&weight * &seq.polys[n]))?;
        for (k, v) in coords.into_iter().enumerate() {
            if k + band < n {
                if !v.is_zero() {
                    return Err(Error::SymmetryViolated { row: n, col: k });
                }
            } else if k < size {
                h.set(n, k, v);
            }
        }
    }
    Ok(BandedRecurrence {
        h,
        norms_sq: seq.norms_sq.clone(),
        center: center.clone(),
        order,
    })
}

/// Closed forms for the orthonormal five-term recurrence of the
/// Laguerre–Sobolev form `int f g e^{-x} dx + f'(0) g'(0)`:
/// `x^2 L_n = a_n L_{n+2} + b_n L_{n+1} + c_n L_n + b_{n-1} L_{n-1} + a_{n-2} L_{n-2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbcReference {
    #[serde(with = "rational::serde_str")]
    pub a_sq: Rational,
    #[serde(with = "rational::serde_str")]
    pub b_sq: Rational,
    /// `c_n` itself (the closed form is the root of a perfect square).
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
}

pub fn reference_abc(n: u64) -> AbcReference {
    let n = int(n as i64);
    let p = |cs: &[i64]| Poly::from_ints(cs).eval(&n);
    let a_sq = p(&[9, 7, 2]) * p(&[6, -5, 2]) * p(&[4, 1]) * p(&[2, 1]) * rational::pow(&p(&[1, 1]), 3)
        / (p(&[4, 3, 2]) * p(&[3, -1, 2]) * p(&[3, 1]));
    let b_poly = p(&[36, 84, 64, 43, 10, 13, 16, 4]);
    let b_sq = int(16) * &b_poly * &b_poly * p(&[1, 1])
        / (p(&[4, 3, 2])
            * rational::pow(&p(&[3, -1, 2]), 2)
            * p(&[6, -5, 2])
            * p(&[3, 1])
            * rational::pow(&p(&[2, 1]), 2));
    let c_num = p(&[36, 120, 37, -81, 82, 57, -23, 12, 12]);
    let c_den = p(&[3, -1, 2]) * p(&[6, -5, 2]) * p(&[2, 1]) * p(&[1, 1]);
    let c = int(2) * (c_num / c_den).abs();
    AbcReference { a_sq, b_sq, c }
}

/// Lower-banded connection matrix `T` with `s = T p`, monic convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub t: BandedOperator,
    pub from_norms: Vec<Rational>,
    pub to_norms: Vec<Rational>,
}

impl Connection {
    /// Orthonormal `T_{n,j} = <s_n, p_j>_{N+1}` (normalized polynomials).
    pub fn orthonormal(&self, n: usize, j: usize) -> SignedSquare {
        let v = self.t.get(n, j);
        let square = &v * &v * self.to_norms[j].abs() / &self.from_norms[n];
        SignedSquare::new(square, rational::signum(&v))
    }
}

/// Connection coefficients between `from` (orthogonal under some form) and
/// `to` (orthogonal under `to_form`):
/// `T_{n,j} = to_form(s_n, p_j) / to_form(p_j, p_j)`.
///
/// Entries below the `band`-th subdiagonal must vanish; otherwise
/// `BandViolation`.
pub fn connection_matrix(
    from: &MonicSequence,
    to: &MonicSequence,
    to_form: &dyn BilinearForm,
    band: usize,
) -> Result<Connection> {
    let size = from.len().min(to.len());
    let mut t = BandedOperator::zeros(size, band, 0);
    for n in 0..size {
        for j in 0..=n {
            let v = to_form.eval(&from.polys[n], &to.polys[j])? / &to.norms_sq[j];
            if j + band < n {
                if !v.is_zero() {
                    return Err(Error::BandViolation { row: n, col: j });
                }
            } else {
                t.set(n, j, v);
            }
        }
    }
    Ok(Connection {
        t,
        from_norms: from.norms_sq[..size].to_vec(),
        to_norms: to.norms_sq[..size].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use crate::measures::{laguerre_moments, sobolev_form, SobolevSpec};

    fn paper_form(count: usize) -> crate::measures::SobolevForm {
        sobolev_form(&SobolevSpec::top_derivative(laguerre_moments(0, count), int(0), 1, int(1)).unwrap())
    }

    #[test]
    fn monic_examples() {
        let seq = monic_sequence(&paper_form(20), 4).unwrap();
        assert_eq!(seq.get(1), &Poly::from_ints(&[-1, 1]));
        assert_eq!(seq.get(2), &Poly::from_ints(&[0, -2, 1]));
        assert_eq!(seq.norms_sq()[2], int(12));
        let shifted = laguerre_moments(0, 20).christoffel_shift(&int(0), 2).unwrap();
        let p = monic_sequence(&shifted, 3).unwrap();
        assert_eq!(p.get(1), &Poly::from_ints(&[-3, 1]));
        assert!(seq.check_orthogonal(&paper_form(20)).unwrap());
    }

    #[test]
    fn not_positive_definite() {
        let m = crate::measures::MomentFunctional::new((0..10).map(|k| int(1 + (1 << k))).collect(), "atoms");
        assert_eq!(monic_sequence(&m, 3), Err(Error::NotPositiveDefinite(2)));
        assert_eq!(monic_sequence_quasi(&m, 3), Err(Error::Degenerate(2)));
    }

    /// Brute-force oracle: classical Gram–Schmidt on monomials without the
    /// Gram-matrix shortcut.
    fn brute_monic(form: &dyn BilinearForm, n: usize) -> Vec<Poly> {
        let mut out: Vec<Poly> = Vec::new();
        for d in 0..=n {
            let mut s = Poly::monomial(d, int(1));
            for q in &out {
                let c = form.eval(&Poly::monomial(d, int(1)), q).unwrap() / form.eval(q, q).unwrap();
                s = &s - &q.scale(&c);
            }
            out.push(s);
        }
        out
    }

    #[test]
    fn jacobi_examples() {
        let lag2 = laguerre_moments(2, 40);
        let seq = monic_sequence(&lag2, 6).unwrap();
        let j = jacobi_matrix(&seq).unwrap();
        assert_eq!(j.b[0], int(3));
        assert_eq!(j.lambda[1], int(3));
        // oracle: brute-force Gram–Schmidt and b_0 = m1/m0
        let brute = brute_monic(&lag2, 3);
        assert_eq!(&brute[1], seq.get(1));
        assert_eq!(lag2.moments()[1].clone() / &lag2.moments()[0], int(3));

        let lag0 = monic_sequence(&laguerre_moments(0, 40), 7).unwrap();
        let j0 = jacobi_matrix(&lag0).unwrap();
        for n in 0..=5 {
            assert_eq!(j0.b[n], int(2 * n as i64 + 1));
            assert_eq!(j0.lambda[n], int((n * n) as i64));
        }
    }

    #[test]
    fn banded_recurrence_examples() {
        let seq = monic_sequence(&paper_form(40), 10).unwrap();
        let rec = banded_recurrence(&seq, &int(0), 1).unwrap();
        assert_eq!(rec.h.get(0, 0), int(2));
        assert_eq!(rec.orthonormal(0, 1).square, int(8));
        assert_eq!(rec.orthonormal(0, 2).square, int(12));
        assert_eq!(rec.h.lower_bandwidth(), 2);
        // symmetric in squares
        for n in 0..rec.size() {
            for k in rec.h.band_cols(n) {
                assert_eq!(rec.orthonormal(n, k).square, rec.orthonormal(k, n).square);
            }
        }
        assert!(rec.symmetrized().is_symmetric());
    }

    #[test]
    fn band_violation_when_point_mismatched() {
        // Mass at c = 1 but recurrence taken for x^2.
        let spec = SobolevSpec::top_derivative(laguerre_moments(0, 40), int(1), 1, int(1)).unwrap();
        let seq = monic_sequence(&sobolev_form(&spec), 8).unwrap();
        assert!(matches!(
            banded_recurrence(&seq, &int(0), 1),
            Err(Error::SymmetryViolated { .. })
        ));
        assert!(banded_recurrence(&seq, &int(1), 1).is_ok());
    }

    #[test]
    fn reference_abc_values() {
        let r = reference_abc(0);
        assert_eq!((r.a_sq, r.b_sq, r.c), (int(12), int(8), int(2)));
        // c_1 = 2 * 252 / 72
        assert_eq!(reference_abc(1).c, int(7));
    }

    #[test]
    fn connection_examples() {
        let form = paper_form(40);
        let seq = monic_sequence(&form, 6).unwrap();
        let shifted = laguerre_moments(0, 40).christoffel_shift(&int(0), 2).unwrap();
        let p = monic_sequence(&shifted, 6).unwrap();
        let conn = connection_matrix(&seq, &p, &shifted, 2).unwrap();
        assert_eq!(conn.orthonormal(0, 0).square, int(2));
        assert_eq!(conn.orthonormal(1, 0).square, int(4));
        assert_eq!(conn.orthonormal(2, 0).square, int(6));
        // band: entries below the 2nd subdiagonal vanish
        assert_eq!(conn.t.get(5, 0), int(0));
        // expansion oracle agrees with the inner-product route
        for n in 0..seq.len() {
            let coords = p.expand(seq.get(n)).unwrap();
            for (j, v) in coords.iter().enumerate() {
                assert_eq!(&conn.t.get(n, j), v);
            }
        }
        // too narrow a band is rejected
        assert!(matches!(
            connection_matrix(&seq, &p, &shifted, 1),
            Err(Error::BandViolation { .. })
        ));
    }

    #[test]
    fn signed_square_helpers() {
        let s = SignedSquare::conjugate(&int(-2), &int(1), &int(2));
        assert_eq!(s.square, int(8));
        assert_eq!(s.sign, -1);
        assert!((s.to_f64() + 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(SignedSquare::new(rat(9, 4), -1).exact(), Some(rat(-3, 2)));
    }
}
