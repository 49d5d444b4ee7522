//! Pointwise realization of the conjugated operator `A B C B^{-1} A^{-1}`.
//!
//! For `y0 > 0` the roots `x_k = c + w^k y0^{1/(N+1)}` turn row `j` of
//! `R_n(y0) A(y0) B` into the values `s_{(N+1)n+j}(x_k)`. Applying the scalar
//! operator at each root and undoing `A B` must give `Lambda_n R_n(y0)`.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use super::discover::ScalarOperator;
use super::operator::{apply_right, RightDifferentialOperator};
use crate::error::{Error, Result};
use crate::exact::rational::{int, Rational};
use crate::exact::Poly;
use crate::matfold::MatrixPolySequence;
use crate::orthopoly::MonicSequence;

/// `Phi_n(x)`, by dividing `x^n - 1` by `Phi_d` for every proper divisor `d`.
pub fn cyclotomic(n: usize) -> Poly {
    assert!(n > 0);
    let mut p = &Poly::monomial(n, Rational::one()) - &Poly::one();
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        let (q, r) = p.div_rem(&cyclotomic(d));
        debug_assert!(r.is_zero());
        p = q;
    }
    p
}

/// Roots-of-unity data for a fold of order `N`. Entries of `B` are stored as
/// exponents of `w = exp(2 pi i / (N+1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldConjugationData {
    order: usize,
}

impl FoldConjugationData {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn size(&self) -> usize {
        self.order + 1
    }

    /// Exponent of `w` in `B_{jk}`.
    pub fn b_exponent(&self, j: usize, k: usize) -> usize {
        (j * k) % self.size()
    }

    pub fn w(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / self.size() as f64)
    }

    pub fn b_f64(&self) -> Vec<Vec<Complex64>> {
        let w = self.w();
        let m = self.size();
        (0..m)
            .map(|j| (0..m).map(|k| w.powu(self.b_exponent(j, k) as u32)).collect())
            .collect()
    }

    /// `B conj(B)^T` with entries reduced modulo `Phi_{N+1}(w)`.
    pub fn gram_symbolic(&self) -> Vec<Vec<Poly>> {
        let m = self.size();
        let phi = cyclotomic(m);
        (0..m)
            .map(|j| {
                (0..m)
                    .map(|l| {
                        // sum_k w^{jk} w^{-lk}
                        let mut coeffs = vec![Rational::zero(); m];
                        for k in 0..m {
                            let e = (self.b_exponent(j, k) + m - self.b_exponent(l, k)) % m;
                            coeffs[e] += int(1);
                        }
                        Poly::new(coeffs).div_rem(&phi).1
                    })
                    .collect()
            })
            .collect()
    }

    /// `B conj(B)^T = (N+1) I` exactly in the cyclotomic field.
    pub fn is_unitary_up_to_scale(&self) -> bool {
        let m = self.size();
        let scaled = Poly::constant(int(m as i64));
        self.gram_symbolic().iter().enumerate().all(|(j, row)| {
            row.iter()
                .enumerate()
                .all(|(l, e)| if j == l { *e == scaled } else { e.is_zero() })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugationEval {
    pub n: usize,
    pub y0: f64,
    pub lhs: Vec<Vec<f64>>,
    pub rhs: Vec<Vec<f64>>,
    /// Largest imaginary part left in the left side, relative to `rhs`.
    pub imag_residual: f64,
    /// `max |lhs - rhs| / max(1, max |rhs|)`
    pub deviation: f64,
}

fn relative_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = b.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let diff = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

/// Evaluates `(R_n A B C B^{-1} A^{-1})(y0)` through the scalar operator and
/// compares it with `Lambda_n R_n(y0)`.
pub fn conjugation_eval(
    op: &ScalarOperator,
    order: usize,
    seq: &MonicSequence,
    center: &Rational,
    n: usize,
    y0: &Rational,
) -> Result<ConjugationEval> {
    if *y0 <= Rational::zero() {
        return Err(Error::InvalidSpec("conjugation is evaluated at y0 > 0 only".into()));
    }
    let m = order + 1;
    let top = m * n + order;
    if seq.len() <= top || op.eigenvalues.len() <= top {
        return Err(Error::InsufficientSequence {
            needed: top + 1,
            available: seq.len().min(op.eigenvalues.len()),
        });
    }
    let data = FoldConjugationData::new(order);
    let y = crate::exact::rational::to_f64(y0);
    let root = y.powf(1.0 / m as f64);
    let c = crate::exact::rational::to_f64(center);
    let w = data.w();
    let xs: Vec<Complex64> = (0..m)
        .map(|k| Complex64::new(c, 0.0) + w.powu(k as u32) * root)
        .collect();
    let b = data.b_f64();
    if root < 1e-150 {
        return Err(Error::NumericalInstability("A(y0) is numerically singular".into()));
    }

    let mut lhs = vec![vec![0.0; m]; m];
    let mut imag_residual = 0.0f64;
    for j in 0..m {
        let d_s = op.apply(seq.get(m * n + j));
        let row: Vec<Complex64> = xs.iter().map(|x| d_s.eval_complex(*x)).collect();
        for l in 0..m {
            // (row B^{-1})_l with B^{-1} = conj(B)^T / m, then divide by A_ll
            let mut v = Complex64::zero();
            for (k, r) in row.iter().enumerate() {
                v += r * b[l][k].conj();
            }
            v /= m as f64 * root.powi(l as i32);
            lhs[j][l] = v.re;
            imag_residual = imag_residual.max(v.im.abs());
        }
    }

    let rhs: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let lambda = crate::exact::rational::to_f64(&op.eigenvalues[m * n + j]);
            let folded = crate::matfold::fold_decompose(&seq.get(m * n + j).shift_compose(center), order);
            (0..m).map(|l| lambda * folded.parts[l].eval_f64(y)).collect()
        })
        .collect();
    let scale = rhs.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    imag_residual /= scale;
    let deviation = relative_deviation(&lhs, &rhs).max(imag_residual);
    Ok(ConjugationEval {
        n,
        y0: y,
        lhs,
        rhs,
        imag_residual,
        deviation,
    })
}

/// Relative deviation between the conjugation path and `(R_n D)(y0)` from
/// an exact matrix operator.
pub fn cross_match(
    eval: &ConjugationEval,
    r: &MatrixPolySequence,
    matrix_op: &RightDifferentialOperator,
) -> Result<f64> {
    let applied = apply_right(r.get(eval.n), matrix_op)?;
    Ok(relative_deviation(&eval.lhs, &applied.eval_f64(eval.y0)))
}

/// `f'' - 2x f'` with eigenvalues `-2m` on monic Hermite polynomials.
pub fn hermite_operator(count: usize) -> ScalarOperator {
    ScalarOperator {
        coeffs: vec![Poly::zero(), Poly::from_ints(&[0, -2]), Poly::one()],
        eigenvalues: (0..count).map(|m| int(-2 * m as i64)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bispec::discover::discover_operator;
    use crate::bispec::operator::EigenvalueLadder;
    use crate::exact::rational::rat;
    use crate::matfold::build_matrix_sequence;
    use crate::measures::hermite_moments;
    use crate::orthopoly::monic_sequence;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic(1), Poly::from_ints(&[-1, 1]));
        assert_eq!(cyclotomic(2), Poly::from_ints(&[1, 1]));
        assert_eq!(cyclotomic(3), Poly::from_ints(&[1, 1, 1]));
        assert_eq!(cyclotomic(4), Poly::from_ints(&[1, 0, 1]));
        assert_eq!(cyclotomic(6), Poly::from_ints(&[1, -1, 1]));
    }

    #[test]
    fn b_is_unitary_up_to_scale() {
        for order in 0..6 {
            assert!(FoldConjugationData::new(order).is_unitary_up_to_scale());
        }
        let b = FoldConjugationData::new(1).b_f64();
        assert!((b[1][1].re + 1.0).abs() < 1e-15 && b[1][1].im.abs() < 1e-15);
    }

    #[test]
    fn hermite_fold_conjugation() {
        let seq = monic_sequence(&hermite_moments(40), 15).unwrap();
        let op = hermite_operator(16);
        assert!(op.check(&seq));
        let e = conjugation_eval(&op, 1, &seq, &int(0), 1, &rat(1, 2)).unwrap();
        assert!(e.deviation < 1e-10, "{e:?}");
        // Lambda_1 = diag(-4, -6)
        let r = build_matrix_sequence(&seq, &int(0), 1).unwrap();
        let ladder = EigenvalueLadder::from_scalar(2, |m| int(-2 * m as i64));
        let matrix_op = discover_operator(&r, &ladder, 2, 2, 7).unwrap().operator;
        for y0 in [rat(1, 4), rat(1, 2), int(1), int(3), int(10)] {
            for n in 0..=6 {
                let e = conjugation_eval(&op, 1, &seq, &int(0), n, &y0).unwrap();
                assert!(e.deviation < 1e-10, "n={n} {e:?}");
                assert!(cross_match(&e, &r, &matrix_op).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn paper_sequence_paths_agree() {
        use crate::bispec::discover::discover_scalar_operator;
        use crate::bispec::operator::{laguerre_sobolev_eigenvalue, reference_operator};
        use crate::measures::{laguerre_moments, sobolev_form, SobolevSpec};
        let form = sobolev_form(&SobolevSpec::top_derivative(laguerre_moments(0, 60), int(0), 1, int(1)).unwrap());
        let seq = monic_sequence(&form, 24).unwrap();
        let (scalar, _) = discover_scalar_operator(&seq, laguerre_sobolev_eigenvalue, 8, 8, 24).unwrap();
        assert_eq!(scalar.order(), 8);
        assert!(scalar.check(&seq));
        let r = build_matrix_sequence(&seq, &int(0), 1).unwrap();
        let (matrix_op, _) = reference_operator();
        for y0 in [rat(1, 4), int(3)] {
            for n in [0, 3, 6] {
                let e = conjugation_eval(&scalar, 1, &seq, &int(0), n, &y0).unwrap();
                assert!(e.deviation < 1e-8, "n={n} {e:?}");
                assert!(cross_match(&e, &r, &matrix_op).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn constant_row_at_zero() {
        let seq = monic_sequence(&hermite_moments(20), 6).unwrap();
        let e = conjugation_eval(&hermite_operator(7), 2, &seq, &int(0), 0, &int(2)).unwrap();
        assert!(e.lhs[0][0].abs() < 1e-12 && e.deviation < 1e-10);
    }

    #[test]
    fn rejects_nonpositive_point() {
        let seq = monic_sequence(&hermite_moments(20), 6).unwrap();
        assert!(conjugation_eval(&hermite_operator(7), 1, &seq, &int(0), 0, &int(0)).is_err());
    }
}
