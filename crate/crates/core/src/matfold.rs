//! Folding of scalar polynomial sequences into matrix polynomials.
//!
//! A scalar polynomial `s` is split along exponent residues modulo `N + 1`
//! around a center `c`: `s(x) = sum_k t^k R_k(t^{N+1})` with `t = x - c`.
//! Stacking the folds of `s_{(N+1)n}, ..., s_{(N+1)n+N}` gives the matrix
//! polynomial `R_n(y)`, `y = t^{N+1}`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::rational::{self, int, Rational};
use crate::exact::{BlockTridiagonal, Matrix, Poly, PolyMatrix};
use crate::measures::BilinearForm;
use crate::orthopoly::{BandedRecurrence, MonicSequence, SignedSquare};

/// The `N + 1` parts of a folded scalar polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldDecomposition {
    pub parts: Vec<Poly>,
}

impl FoldDecomposition {
    /// `sum_k x^k parts_k(x^{N+1})`
    pub fn reassemble(&self) -> Poly {
        reassemble(&self.parts)
    }
}

pub fn fold_decompose(s: &Poly, order: usize) -> FoldDecomposition {
    let m = order + 1;
    let mut buckets = vec![Vec::new(); m];
    for (e, c) in s.coeffs().iter().enumerate() {
        let part = &mut buckets[e % m];
        let k = e / m;
        if part.len() <= k {
            part.resize(k + 1, Rational::zero());
        }
        part[k] = c.clone();
    }
    FoldDecomposition {
        parts: buckets.into_iter().map(Poly::new).collect(),
    }
}

pub fn reassemble(parts: &[Poly]) -> Poly {
    let m = parts.len();
    let len = parts
        .iter()
        .enumerate()
        .map(|(k, p)| (p.degree() + 1).max(0) as usize * m + k)
        .max()
        .unwrap_or(0);
    let mut coeffs = vec![Rational::zero(); len];
    for (k, p) in parts.iter().enumerate() {
        for (j, c) in p.coeffs().iter().enumerate() {
            coeffs[j * m + k] = c.clone();
        }
    }
    Poly::new(coeffs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Rows are folds of monic scalar polynomials; leading coefficient is
    /// unit lower triangular.
    ScalarMonic,
    /// Leading matrix coefficient is the identity.
    Monic,
}

/// Matrix polynomials `R_0, R_1, ...` obtained by folding.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolySequence {
    order: usize,
    center: Rational,
    mats: Vec<PolyMatrix>,
    normalization: Normalization,
    /// Squared norms of the scalar polynomial behind each row, in row order
    /// (`(N+1) n + i`), when known.
    row_norms: Option<Vec<Rational>>,
}

impl MatrixPolySequence {
    pub fn new(order: usize, center: Rational, mats: Vec<PolyMatrix>, normalization: Normalization) -> Self {
        Self {
            order,
            center,
            mats,
            normalization,
            row_norms: None,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn block_size(&self) -> usize {
        self.order + 1
    }

    pub fn center(&self) -> &Rational {
        &self.center
    }

    pub fn mats(&self) -> &[PolyMatrix] {
        &self.mats
    }

    pub fn get(&self, n: usize) -> &PolyMatrix {
        &self.mats[n]
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn row_norms(&self) -> Option<&[Rational]> {
        self.row_norms.as_deref()
    }

    /// Leading `len` members.
    pub fn truncate(&self, len: usize) -> Self {
        let mut out = self.clone();
        out.mats.truncate(len);
        out
    }

    /// Scalar polynomial (in the original variable `x`) behind row `i` of
    /// `R_n`.
    pub fn row_scalar(&self, n: usize, i: usize) -> Poly {
        reassemble(&self.mats[n].row(i)).shift_compose(&-self.center.clone())
    }
}

/// Builds `R_n` for every complete block of `seq`, folding around `center`.
pub fn build_matrix_sequence(seq: &MonicSequence, center: &Rational, order: usize) -> Result<MatrixPolySequence> {
    let m = order + 1;
    let count = seq.len() / m;
    if count == 0 {
        return Err(Error::InsufficientSequence {
            needed: m,
            available: seq.len(),
        });
    }
    let centered = seq.recentered(center);
    let mats = (0..count)
        .map(|n| {
            let rows: Vec<Vec<Poly>> = (0..m)
                .map(|i| {
                    let mut parts = fold_decompose(centered.get(m * n + i), order).parts;
                    parts.resize(m, Poly::zero());
                    parts
                })
                .collect();
            PolyMatrix::from_entries(&rows)
        })
        .collect();
    Ok(MatrixPolySequence {
        order,
        center: center.clone(),
        mats,
        normalization: Normalization::ScalarMonic,
        row_norms: Some(seq.norms_sq()[..count * m].to_vec()),
    })
}

/// Matrix inner product `<R_n, R_m>` by scalar reduction: entry `(i, j)` is
/// the scalar form applied to the polynomials behind row `i` of `a` and row
/// `j` of `b`.
pub fn matrix_gram(a: &PolyMatrix, b: &PolyMatrix, center: &Rational, form: &dyn BilinearForm) -> Result<Matrix> {
    let back = -center.clone();
    let rows_a: Vec<Poly> = (0..a.rows())
        .map(|i| reassemble(&a.row(i)).shift_compose(&back))
        .collect();
    let rows_b: Vec<Poly> = (0..b.rows())
        .map(|j| reassemble(&b.row(j)).shift_compose(&back))
        .collect();
    let mut g = Matrix::zeros(a.rows(), b.rows());
    for (i, p) in rows_a.iter().enumerate() {
        for (j, q) in rows_b.iter().enumerate() {
            g[(i, j)] = form.eval(p, q)?;
        }
    }
    Ok(g)
}

/// Block recurrence `y R_n = S_n R_{n-1} + D_n R_n + U_n R_{n+1}` in the
/// scalar-monic row convention, with the orthonormal view by squares.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTTRRCoeffs {
    pub order: usize,
    /// `S_n` for `n >= 1` (index `n - 1`).
    pub sub: Vec<Matrix>,
    pub diag: Vec<Matrix>,
    pub sup: Vec<Matrix>,
    norms: Vec<Rational>,
}

impl BlockTTRRCoeffs {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn orth(&self, block: &Matrix, row0: usize, col0: usize) -> Vec<Vec<SignedSquare>> {
        (0..block.rows())
            .map(|i| {
                (0..block.cols())
                    .map(|j| SignedSquare::conjugate(&block[(i, j)], &self.norms[row0 + i], &self.norms[col0 + j]))
                    .collect()
            })
            .collect()
    }

    /// Orthonormal `A_n` (block `(n, n+1)`).
    pub fn a_orth(&self, n: usize) -> Vec<Vec<SignedSquare>> {
        let m = self.order + 1;
        self.orth(&self.sup[n], m * n, m * (n + 1))
    }

    /// Orthonormal `B_n` (block `(n, n)`).
    pub fn b_orth(&self, n: usize) -> Vec<Vec<SignedSquare>> {
        let m = self.order + 1;
        self.orth(&self.diag[n], m * n, m * n)
    }
}

/// Block coefficients read off the scalar banded recurrence, then verified
/// as an exact polynomial-matrix identity in the folded variable.
pub fn matrix_ttrr(r: &MatrixPolySequence, rec: &BandedRecurrence) -> Result<BlockTTRRCoeffs> {
    let m = r.block_size();
    if rec.order != r.order || rec.center != r.center {
        return Err(Error::DimensionMismatch(
            "recurrence and folded sequence use different centers or orders".into(),
        ));
    }
    // block row n needs H columns up to m(n+2)-1 and R_{n+1}
    let blocks = (rec.size() / m).saturating_sub(1).min(r.len().saturating_sub(1));
    if blocks == 0 {
        return Err(Error::InsufficientSequence {
            needed: 2 * m,
            available: rec.size(),
        });
    }
    let block = |bi: usize, bj: usize| Matrix::from_fn(m, m, |i, j| rec.h.get(m * bi + i, m * bj + j));
    let diag: Vec<Matrix> = (0..blocks).map(|n| block(n, n)).collect();
    let sup: Vec<Matrix> = (0..blocks).map(|n| block(n, n + 1)).collect();
    let sub: Vec<Matrix> = (1..blocks).map(|n| block(n, n - 1)).collect();
    for n in 0..blocks {
        let mut residual = &r.mats[n].shift_up(1) - &r.mats[n].left_mul(&diag[n]);
        residual = &residual - &r.mats[n + 1].left_mul(&sup[n]);
        if n > 0 {
            residual = &residual - &r.mats[n - 1].left_mul(&sub[n - 1]);
        }
        if !residual.is_zero() {
            return Err(Error::IdentityViolated {
                location: format!("block recurrence at n = {n}"),
                residual: format!("{:?}", residual.entries()),
            });
        }
    }
    let norms = r.row_norms.clone().unwrap_or_else(|| rec.norms_sq.clone());
    Ok(BlockTTRRCoeffs {
        order: r.order,
        sub,
        diag,
        sup,
        norms,
    })
}

fn ev(cs: &[i64], n: &Rational) -> Rational {
    Poly::from_ints(cs).eval(n)
}

/// Closed forms of the orthonormal `A_n`, `B_n` for the folded
/// Laguerre–Sobolev sequence (`alpha = 0`, `c = 0`, `N = 1`, mass on `f'(0)`),
/// as signed squares.
pub fn reference_ab(n: u64) -> (Vec<Vec<SignedSquare>>, Vec<Vec<SignedSquare>>) {
    let n = int(n as i64);
    let e = |cs: &[i64]| ev(cs, &n);
    let sq = |r: Rational| &r * &r;
    let f8a = e(&[9, 14, 8]); // 8n^2 + 14n + 9
    let f8b = e(&[3, -2, 8]); // 8n^2 - 2n + 3
    let f4a = e(&[3, -5, 4]); // 4n^2 - 5n + 3
    let f4b = e(&[2, 3, 4]); // 4n^2 + 3n + 2
    let f4c = e(&[9, 11, 4]); // 4n^2 + 11n + 9
    let l = |a: i64, b: i64| e(&[b, a]); // a n + b

    let a00 = int(4) * &f8a * &f4a * rational::pow(&l(2, 1), 3) * l(1, 2) * l(1, 1) / (&f8b * &f4b * l(2, 3));
    let p7 = e(&[135, 570, 1414, 2692, 3640, 3088, 1408, 256]);
    let a10 = int(16) * sq(p7) * l(1, 1) / (&f8a * &f8b * sq(f4b.clone()) * sq(l(2, 3)) * l(1, 2));
    let a11 = int(4) * &f8b * &f4c * l(2, 5) * l(2, 3) * rational::pow(&l(1, 1), 3) / (&f8a * &f4b * l(1, 2));
    let b00 = int(2) * e(&[9, 60, 37, -162, 328, 456, -368, 384, 768]) / (&f8b * &f4a * l(2, 1) * l(1, 1));
    let q7 = e(&[9, 42, 64, 86, 40, 104, 256, 128]);
    let b01 = int(16) * sq(q7) * l(2, 1) / (sq(f8b.clone()) * &f4b * &f4a * l(2, 3) * sq(l(1, 1)));
    let b11 = int(2) * e(&[63, 303, 1099, 2898, 5128, 6744, 6352, 3456, 768]) / (&f8b * &f4b * l(2, 3) * l(1, 1));

    let from_value = |v: Rational| SignedSquare::new(&v * &v, rational::signum(&v));
    let a = vec![
        vec![SignedSquare::new(a00, 1), SignedSquare::zero()],
        vec![SignedSquare::new(a10, -1), SignedSquare::new(a11, 1)],
    ];
    let b = vec![
        vec![from_value(b00), SignedSquare::new(b01.clone(), -1)],
        vec![SignedSquare::new(b01, -1), from_value(b11)],
    ];
    (a, b)
}

/// Outcome of comparing computed `A_n`, `B_n` with [`reference_ab`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbComparison {
    /// Diagonal `+-1` similarity fixed from `n = 0`.
    pub similarity: Vec<i8>,
    pub per_n: Vec<AbMatch>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbMatch {
    pub n: usize,
    pub squares_match: bool,
    pub signs_match: bool,
}

impl AbComparison {
    pub fn all_match(&self) -> bool {
        self.per_n.iter().all(|m| m.squares_match && m.signs_match)
    }
}

/// Compares the `2 x 2` orthonormal blocks with the closed forms for
/// `0 <= n < count`.
pub fn compare_ab(coeffs: &BlockTTRRCoeffs, count: usize) -> Result<AbComparison> {
    if coeffs.order != 1 {
        return Err(Error::DimensionMismatch(
            "closed forms exist for 2 x 2 blocks only".into(),
        ));
    }
    if count > coeffs.len() {
        return Err(Error::InsufficientSequence {
            needed: count,
            available: coeffs.len(),
        });
    }
    let (_, b0) = reference_ab(0);
    let ours = coeffs.b_orth(0);
    let s1 = ours[0][1].sign * b0[0][1].sign;
    let similarity = vec![1i8, if s1 == 0 { 1 } else { s1 }];
    let per_n = (0..count)
        .map(|n| {
            let (ra, rb) = reference_ab(n as u64);
            let pairs = [(coeffs.a_orth(n), ra), (coeffs.b_orth(n), rb)];
            let mut squares_match = true;
            let mut signs_match = true;
            for (got, want) in &pairs {
                for i in 0..2 {
                    for j in 0..2 {
                        squares_match &= got[i][j].square == want[i][j].square;
                        signs_match &= got[i][j].sign * similarity[i] * similarity[j] == want[i][j].sign;
                    }
                }
            }
            AbMatch {
                n,
                squares_match,
                signs_match,
            }
        })
        .collect();
    Ok(AbComparison { similarity, per_n })
}

/// `P_n = Gamma_n^{-1} R_n` with `Gamma_n` the leading matrix coefficient.
/// Returns the monic sequence and the leading coefficients.
pub fn monic_normalize(r: &MatrixPolySequence) -> Result<(MatrixPolySequence, Vec<Matrix>)> {
    let mut mats = Vec::with_capacity(r.len());
    let mut leading = Vec::with_capacity(r.len());
    for (n, rn) in r.mats.iter().enumerate() {
        let g = rn.coeff(n);
        let inv = g.inverse().map_err(|_| Error::SingularLeading(n))?;
        if rn.degree() > n as isize {
            return Err(Error::SingularLeading(n));
        }
        mats.push(rn.left_mul(&inv));
        leading.push(g);
    }
    Ok((
        MatrixPolySequence {
            order: r.order,
            center: r.center.clone(),
            mats,
            normalization: Normalization::Monic,
            row_norms: None,
        },
        leading,
    ))
}

/// Closed form of the orthonormal leading coefficient of `R_n` for the
/// folded Laguerre–Sobolev sequence, `n >= 2`, as signed squares.
pub fn reference_leading(n: u64) -> Vec<Vec<SignedSquare>> {
    assert!(n >= 2, "closed form needs n >= 2");
    let fact = |k: u64| Rational::from_integer(rational::factorial(k));
    let k = int(n as i64);
    let e = |cs: &[i64]| ev(cs, &k);
    let sq = |r: Rational| &r * &r;
    let f8b = e(&[3, -2, 8]);
    let f4a = e(&[3, -5, 4]);
    let f4b = e(&[2, 3, 4]);
    let l = |a: i64, b: i64| e(&[b, a]);
    let g00 =
        &f4a * l(2, 1) / (int(16) * &f8b * sq(l(2, -1)) * l(1, 1) * sq(l(1, -1)) * sq(k.clone()) * sq(fact(2 * n - 3)));
    let g10 = sq(e(&[3, -5, 6, 8])) * sq(l(2, 1))
        / (int(16)
            * &f8b
            * &f4b
            * l(2, 3)
            * sq(l(2, -1))
            * sq(l(2, -3))
            * l(1, 1)
            * sq(l(1, -1))
            * sq(k.clone())
            * sq(fact(2 * n - 4)));
    let g11 = &f8b * l(1, 1) / (&f4b * l(2, 3) * sq(fact(2 * n)));
    vec![
        vec![SignedSquare::new(g00, 1), SignedSquare::zero()],
        vec![SignedSquare::new(g10, 1), SignedSquare::new(g11, -1)],
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingEntry {
    pub i: usize,
    pub j: usize,
    #[serde(with = "rational::serde_str")]
    pub computed_square: Rational,
    #[serde(with = "rational::serde_str")]
    pub closed_form_square: Rational,
    pub square_match: bool,
    pub computed_sign: i8,
    pub closed_form_sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingReport {
    pub n: usize,
    pub entries: Vec<LeadingEntry>,
}

/// Compares the orthonormal leading coefficients of `r` (squares and signs)
/// with [`reference_leading`] for `2 <= n < r.len()`.
pub fn leading_report(r: &MatrixPolySequence) -> Result<Vec<LeadingReport>> {
    let norms = r
        .row_norms
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("row norms unknown".into()))?;
    if r.order != 1 {
        return Err(Error::DimensionMismatch(
            "closed form exists for 2 x 2 blocks only".into(),
        ));
    }
    let mut out = Vec::new();
    for n in 2..r.len() {
        let g = r.mats[n].coeff(n);
        let reference = reference_leading(n as u64);
        let mut entries = Vec::new();
        for i in 0..2 {
            for j in 0..=i {
                let v = &g[(i, j)];
                let computed = v * v / &norms[2 * n + i];
                let want = &reference[i][j];
                entries.push(LeadingEntry {
                    i,
                    j,
                    square_match: computed == want.square,
                    computed_sign: rational::signum(v),
                    closed_form_sign: want.sign,
                    computed_square: computed,
                    closed_form_square: want.square.clone(),
                });
            }
        }
        out.push(LeadingReport { n, entries });
    }
    Ok(out)
}

/// Monic block Jacobi operator of a monic sequence:
/// `y P_n = P_{n+1} + D_n P_n + S_n P_{n-1}`, with identity superdiagonal.
///
/// Coefficients are extracted from the top coefficients and the identity is
/// then verified exactly. The result has `p.len() - 1` block rows.
pub fn monic_block_jacobi(p: &MatrixPolySequence) -> Result<BlockTridiagonal> {
    if p.normalization != Normalization::Monic {
        return Err(Error::InvalidSpec("block Jacobi needs a monic sequence".into()));
    }
    let size = p.block_size();
    let rows = p.len().saturating_sub(1);
    if rows == 0 {
        return Err(Error::InsufficientSequence {
            needed: 2,
            available: p.len(),
        });
    }
    let mut diag = Vec::with_capacity(rows);
    let mut sub = Vec::with_capacity(rows.saturating_sub(1));
    for n in 0..rows {
        let base = &p.mats[n].shift_up(1) - &p.mats[n + 1];
        let d = if n == 0 {
            base.coeff(0)
        } else {
            &p.mats[n].coeff(n - 1) - &p.mats[n + 1].coeff(n)
        };
        let mut residual = &base - &p.mats[n].left_mul(&d);
        if n > 0 {
            let s = residual.coeff(n - 1);
            residual = &residual - &p.mats[n - 1].left_mul(&s);
            sub.push(s);
        }
        if !residual.is_zero() {
            return Err(Error::IdentityViolated {
                location: format!("monic block recurrence at n = {n}"),
                residual: format!("{:?}", residual.entries()),
            });
        }
        diag.push(d);
    }
    let sup = vec![Matrix::identity(size); rows.saturating_sub(1)];
    BlockTridiagonal::new(diag, sub, sup)
}

/// Monic matrix sequence obtained by folding a scalar sequence and
/// normalizing.
pub fn monic_fold(seq: &MonicSequence, center: &Rational, order: usize) -> Result<MatrixPolySequence> {
    Ok(monic_normalize(&build_matrix_sequence(seq, center, order)?)?.0)
}

/// Identity check `<R_n, R_m> = delta_{nm} diag(||s||^2)` by scalar
/// reduction, for all `n, m < count`.
pub fn check_matrix_orthogonality(r: &MatrixPolySequence, form: &dyn BilinearForm, count: usize) -> Result<bool> {
    let norms = r
        .row_norms
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("row norms unknown".into()))?;
    let m = r.block_size();
    for a in 0..count {
        for b in 0..=a {
            let g = matrix_gram(&r.mats[a], &r.mats[b], &r.center, form)?;
            let want = if a == b {
                Matrix::diagonal(&norms[m * a..m * a + m])
            } else {
                Matrix::zeros(m, m)
            };
            if g != want {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
