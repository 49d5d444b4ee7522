//! Moment functionals, Christoffel-shifted measures and Sobolev-type
//! bilinear forms.
//!
//! Measures are represented only by their moments, so every inner product in
//! the crate is an exact finite sum. A Sobolev-type form adds a quadratic form
//! in the derivatives `f(c), f'(c), ..., f^(N)(c)` with a symmetric positive
//! semi-definite mass matrix.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::{self, Matrix};
use crate::exact::rational::{self, big, binomial, factorial, Rational};
use crate::exact::Poly;

/// Linear functional on polynomials given by its moments `m_k = L[x^k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentFunctional {
    #[serde(with = "rational::serde_vec")]
    moments: Vec<Rational>,
    label: String,
}

impl MomentFunctional {
    pub fn new(moments: Vec<Rational>, label: impl Into<String>) -> Self {
        Self {
            moments,
            label: label.into(),
        }
    }

    pub fn moments(&self) -> &[Rational] {
        &self.moments
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn moment(&self, k: usize) -> Result<&Rational> {
        self.moments.get(k).ok_or(Error::InsufficientMoments {
            needed: k + 1,
            available: self.moments.len(),
        })
    }

    /// `L[f g]`
    pub fn integrate(&self, f: &Poly, g: &Poly) -> Result<Rational> {
        if f.is_zero() || g.is_zero() {
            return Ok(Rational::zero());
        }
        let top = (f.degree() + g.degree()) as usize;
        if top >= self.moments.len() {
            return Err(Error::InsufficientMoments {
                needed: top + 1,
                available: self.moments.len(),
            });
        }
        // accumulate over integers; one reduction at the end
        let scaled =
            |cs: &[Rational], d: &BigInt| -> Vec<BigInt> { cs.iter().map(|c| c.numer() * (d / c.denom())).collect() };
        let (df, dg) = (
            rational::common_denominator(f.coeffs()),
            rational::common_denominator(g.coeffs()),
        );
        let dm = rational::common_denominator(&self.moments[..=top]);
        let (fi, gi, mi) = (
            scaled(f.coeffs(), &df),
            scaled(g.coeffs(), &dg),
            scaled(&self.moments[..=top], &dm),
        );
        let mut acc = BigInt::zero();
        for (i, a) in fi.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut inner = BigInt::zero();
            for (j, b) in gi.iter().enumerate() {
                if !b.is_zero() {
                    inner += b * &mi[i + j];
                }
            }
            acc += a * inner;
        }
        Ok(Rational::new(acc, df * dg * dm))
    }

    /// Hankel matrix `(m_{i+j})_{i,j=0..=n}`.
    pub fn hankel(&self, n: usize) -> Result<Matrix> {
        self.moment(2 * n)?;
        Ok(Matrix::from_fn(n + 1, n + 1, |i, j| self.moments[i + j].clone()))
    }

    /// Checks that the leading Hankel minors up to order `n + 1` are
    /// positive, failing with `NotPositiveDefinite(k)` at the first that is
    /// not.
    pub fn check_positive_definite(&self, n: usize) -> Result<()> {
        let h = self.hankel(n)?;
        match matrix::ldlt(&h) {
            Ok((_, d)) => match d.iter().position(|p| p <= &Rational::zero()) {
                Some(k) => Err(Error::NotPositiveDefinite(k)),
                None => Ok(()),
            },
            Err(Error::Degenerate(k)) => Err(Error::NotPositiveDefinite(k)),
            Err(e) => Err(e),
        }
    }

    /// Moments of `(x - c)^power dmu`.
    pub fn christoffel_shift(&self, c: &Rational, power: usize) -> Result<Self> {
        christoffel_shift(self, c, power)
    }
}

/// Moments `Gamma(k + alpha + 1) = (k + alpha)!` of `x^alpha e^{-x} dx` on
/// the half-line, `k = 0..count`.
pub fn laguerre_moments(alpha: u64, count: usize) -> MomentFunctional {
    let moments = (0..count as u64).map(|k| big(factorial(k + alpha))).collect();
    MomentFunctional::new(moments, format!("laguerre(alpha={alpha})"))
}

/// Moments of `e^{-x^2} dx / sqrt(pi)`: `m_{2k} = (2k-1)!! / 2^k`, odd
/// moments vanish.
pub fn hermite_moments(count: usize) -> MomentFunctional {
    let mut moments = Vec::with_capacity(count);
    let mut even = Rational::one();
    for k in 0..count {
        if k % 2 == 1 {
            moments.push(Rational::zero());
        } else {
            if k > 0 {
                even *= rational::rat(k as i64 - 1, 2);
            }
            moments.push(even.clone());
        }
    }
    MomentFunctional::new(moments, "hermite")
}

/// Moments of `(x - c)^power dmu` via the binomial expansion
/// `m'_k = sum_i C(power, i) (-c)^(power - i) m_{k+i}`.
pub fn christoffel_shift(mu: &MomentFunctional, c: &Rational, power: usize) -> Result<MomentFunctional> {
    if mu.len() <= power {
        return Err(Error::InsufficientMoments {
            needed: power + 1,
            available: mu.len(),
        });
    }
    let weights: Vec<Rational> = (0..=power)
        .map(|i| big(binomial(power as u64, i as u64)) * rational::pow(&-c, (power - i) as u32))
        .collect();
    let count = mu.len() - power;
    let moments = (0..count)
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, w)| acc + w * &mu.moments[k + i])
        })
        .collect();
    Ok(MomentFunctional::new(
        moments,
        format!("(x - {c})^{power} * {}", mu.label),
    ))
}

/// Data of the form `<f,g> = L[f g] + sum_{j,k} M_{jk} f^(j)(c) g^(k)(c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevSpec {
    base: MomentFunctional,
    point: Rational,
    order: usize,
    mass: Matrix,
}

impl SobolevSpec {
    /// Validates that `mass` is `(order+1) x (order+1)`, symmetric and
    /// positive semi-definite.
    pub fn new(base: MomentFunctional, point: Rational, order: usize, mass: Matrix) -> Result<Self> {
        if mass.rows() != order + 1 || mass.cols() != order + 1 {
            return Err(Error::InvalidSpec(format!(
                "mass matrix must be {0}x{0}, got {1}x{2}",
                order + 1,
                mass.rows(),
                mass.cols()
            )));
        }
        if !mass.is_symmetric() {
            return Err(Error::InvalidSpec("mass matrix is not symmetric".into()));
        }
        if !matrix::is_positive_semidefinite(&mass) {
            return Err(Error::InvalidSpec("mass matrix is not positive semi-definite".into()));
        }
        Ok(Self {
            base,
            point,
            order,
            mass,
        })
    }

    /// Mass `diag(0, ..., 0, m)` on the top derivative only.
    pub fn top_derivative(base: MomentFunctional, point: Rational, order: usize, m: Rational) -> Result<Self> {
        let mut mass = Matrix::zeros(order + 1, order + 1);
        mass[(order, order)] = m;
        Self::new(base, point, order, mass)
    }

    pub fn base(&self) -> &MomentFunctional {
        &self.base
    }

    pub fn point(&self) -> &Rational {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mass(&self) -> &Matrix {
        &self.mass
    }

    /// The pure measure part (`M = 0`).
    pub fn without_mass(&self) -> Self {
        Self {
            mass: Matrix::zeros(self.order + 1, self.order + 1),
            ..self.clone()
        }
    }

    /// Moments of `(x - c)^{N+1} dmu`.
    pub fn christoffel_functional(&self) -> Result<MomentFunctional> {
        christoffel_shift(&self.base, &self.point, self.order + 1)
    }
}

/// A symmetric bilinear form on polynomials of bounded degree.
pub trait BilinearForm {
    fn eval(&self, f: &Poly, g: &Poly) -> Result<Rational>;

    /// Largest `deg f + deg g` the form can evaluate.
    fn max_degree(&self) -> usize;
}

impl BilinearForm for MomentFunctional {
    fn eval(&self, f: &Poly, g: &Poly) -> Result<Rational> {
        self.integrate(f, g)
    }

    fn max_degree(&self) -> usize {
        self.moments.len().saturating_sub(1)
    }
}

/// Sobolev-type form built from a [`SobolevSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevForm {
    spec: SobolevSpec,
}

impl SobolevForm {
    pub fn spec(&self) -> &SobolevSpec {
        &self.spec
    }

    fn jet(&self, f: &Poly) -> Vec<Rational> {
        (0..=self.spec.order)
            .map(|j| f.derivative(j).eval(&self.spec.point))
            .collect()
    }
}

impl BilinearForm for SobolevForm {
    fn eval(&self, f: &Poly, g: &Poly) -> Result<Rational> {
        let mut acc = self.spec.base.integrate(f, g)?;
        if self.spec.mass.is_zero() {
            return Ok(acc);
        }
        let (jf, jg) = (self.jet(f), self.jet(g));
        let mg = self.spec.mass.mul_vec(&jg);
        for (a, b) in jf.iter().zip(&mg) {
            acc += a * b;
        }
        Ok(acc)
    }

    fn max_degree(&self) -> usize {
        self.spec.base.max_degree()
    }
}

/// Bilinear form given by an arbitrary closure.
pub struct ClosureForm<F> {
    f: F,
    max_degree: usize,
}

impl<F> ClosureForm<F>
where
    F: Fn(&Poly, &Poly) -> Result<Rational>,
{
    pub fn new(max_degree: usize, f: F) -> Self {
        Self { f, max_degree }
    }
}

impl<F> BilinearForm for ClosureForm<F>
where
    F: Fn(&Poly, &Poly) -> Result<Rational>,
{
    fn eval(&self, f: &Poly, g: &Poly) -> Result<Rational> {
        (self.f)(f, g)
    }

    fn max_degree(&self) -> usize {
        self.max_degree
    }
}

pub fn sobolev_form(spec: &SobolevSpec) -> SobolevForm {
    SobolevForm { spec: spec.clone() }
}

/// `G_{ij} = B(x^i, x^j)`, `0 <= i, j <= n`.
pub fn gram_matrix(form: &dyn BilinearForm, n: usize) -> Result<Matrix> {
    if 2 * n > form.max_degree() {
        return Err(Error::InsufficientMoments {
            needed: 2 * n + 1,
            available: form.max_degree() + 1,
        });
    }
    let monomials: Vec<Poly> = (0..=n).map(|k| Poly::monomial(k, Rational::one())).collect();
    let mut g = Matrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in i..=n {
            let v = form.eval(&monomials[i], &monomials[j])?;
            g[(j, i)] = v.clone();
            g[(i, j)] = v;
        }
    }
    Ok(g)
}

/// First monomial pair violating the commutation identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryCounterexample {
    pub i: usize,
    pub j: usize,
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub counterexample: Option<SymmetryCounterexample>,
}

/// Tests `B(t^{N+1} x^i, t x^j) = B(t x^i, t^{N+1} x^j)` with `t = x - center`
/// for all `0 <= i, j <= degree`.
///
/// With `center = 0` this is the statement that multiplication by `x^{N+1}`
/// is symmetric and commutes with multiplication by `x`.
pub fn symmetry_check(
    form: &dyn BilinearForm,
    center: &Rational,
    order: usize,
    degree: usize,
) -> Result<SymmetryReport> {
    let needed = 2 * degree + order + 2;
    if needed > form.max_degree() {
        return Err(Error::InsufficientMoments {
            needed: needed + 1,
            available: form.max_degree() + 1,
        });
    }
    let t = Poly::shifted_power(center, 1);
    let t_high = Poly::shifted_power(center, order + 1);
    let mut pairs = 0;
    for i in 0..=degree {
        let p = Poly::monomial(i, Rational::one());
        let (hp, tp) = (&t_high * &p, &t * &p);
        for j in 0..=degree {
            let q = Poly::monomial(j, Rational::one());
            let lhs = form.eval(&hp, &(&t * &q))?;
            let rhs = form.eval(&tp, &(&t_high * &q))?;
            pairs += 1;
            if lhs != rhs {
                return Ok(SymmetryReport {
                    holds: false,
                    pairs_checked: pairs,
                    counterexample: Some(SymmetryCounterexample { i, j, lhs, rhs }),
                });
            }
        }
    }
    Ok(SymmetryReport {
        holds: true,
        pairs_checked: pairs,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};

    fn paper_spec(count: usize) -> SobolevSpec {
        SobolevSpec::top_derivative(laguerre_moments(0, count), int(0), 1, int(1)).unwrap()
    }

    #[test]
    fn laguerre_moment_values() {
        assert_eq!(laguerre_moments(0, 4).moments()[3], int(6));
        assert_eq!(laguerre_moments(2, 4).moments()[1], int(6));
        assert_eq!(laguerre_moments(0, 1).moments()[0], int(1));
    }

    #[test]
    fn christoffel_examples() {
        let mu = laguerre_moments(0, 10);
        let at0 = christoffel_shift(&mu, &int(0), 2).unwrap();
        assert_eq!(at0.moments()[0], int(2));
        // index shift when c = 0
        assert_eq!(at0.moments(), &mu.moments()[2..]);
        let at1 = christoffel_shift(&mu, &int(1), 2).unwrap();
        // oracle: m2 - 2 m1 + m0
        let m = mu.moments();
        assert_eq!(at1.moments()[0], &m[2] - int(2) * &m[1] + &m[0]);
        let c = rat(3, 2);
        for k in 0..at1.len() {
            let via = christoffel_shift(&mu, &c, 2).unwrap().moments()[k].clone();
            let m = mu.moments();
            assert_eq!(via, &m[k + 2] - int(2) * &c * &m[k + 1] + &c * &c * &m[k]);
        }
        assert!(matches!(
            christoffel_shift(&laguerre_moments(0, 2), &int(0), 2),
            Err(Error::InsufficientMoments { .. })
        ));
    }

    #[test]
    fn sobolev_form_examples() {
        let form = sobolev_form(&paper_spec(10));
        let (one, x, x2) = (Poly::one(), Poly::x(), Poly::from_ints(&[0, 0, 1]));
        assert_eq!(form.eval(&one, &one).unwrap(), int(1));
        assert_eq!(form.eval(&x, &x).unwrap(), int(3));
        assert_eq!(form.eval(&x, &x2).unwrap(), int(6));
    }

    #[test]
    fn gram_examples() {
        let form = sobolev_form(&paper_spec(10));
        assert_eq!(
            gram_matrix(&form, 2).unwrap(),
            Matrix::from_ints(&[&[1, 1, 2], &[1, 3, 6], &[2, 6, 24]])
        );
        assert_eq!(gram_matrix(&form, 0).unwrap(), Matrix::from_ints(&[&[1]]));
        let shifted = paper_spec(10).christoffel_functional().unwrap();
        assert_eq!(
            gram_matrix(&shifted, 1).unwrap(),
            Matrix::from_ints(&[&[2, 6], &[6, 24]])
        );
        assert!(gram_matrix(&form, 5).is_err());
    }

    #[test]
    fn spec_validation() {
        let mu = laguerre_moments(0, 6);
        let bad = Matrix::from_ints(&[&[0, 1], &[0, 1]]);
        assert!(matches!(
            SobolevSpec::new(mu.clone(), int(0), 1, bad),
            Err(Error::InvalidSpec(_))
        ));
        let indefinite = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        assert!(SobolevSpec::new(mu.clone(), int(0), 1, indefinite).is_err());
        assert!(SobolevSpec::new(mu, int(0), 2, Matrix::identity(2)).is_err());
    }

    #[test]
    fn positive_definiteness() {
        assert!(laguerre_moments(0, 30).check_positive_definite(14).is_ok());
        // finitely supported functional (two atoms) fails at degree 2
        let two_atoms = MomentFunctional::new((0..8).map(|k| int(1 + (1 << k))).collect(), "atoms");
        assert_eq!(two_atoms.check_positive_definite(3), Err(Error::NotPositiveDefinite(2)));
        assert!(hermite_moments(20).check_positive_definite(9).is_ok());
    }

    #[test]
    fn symmetry_examples() {
        let spec = paper_spec(40);
        let form = sobolev_form(&spec);
        let r = symmetry_check(&form, &int(0), 1, 6).unwrap();
        assert!(r.holds);

        // Mass at c = 1, still testing multiplication by x^2.
        let moved = SobolevSpec::top_derivative(laguerre_moments(0, 40), int(1), 1, int(1)).unwrap();
        let r = symmetry_check(&sobolev_form(&moved), &int(0), 1, 6).unwrap();
        assert!(!r.holds);
        let ce = r.counterexample.unwrap();
        // brute-force oracle for the reported pair
        let p = Poly::monomial(ce.i, int(1));
        let q = Poly::monomial(ce.j, int(1));
        let x = Poly::x();
        let x2 = Poly::from_ints(&[0, 0, 1]);
        let direct_l = sobolev_form(&moved).eval(&(&x2 * &p), &(&x * &q)).unwrap();
        let direct_r = sobolev_form(&moved).eval(&(&x * &p), &(&x2 * &q)).unwrap();
        assert_ne!(direct_l, direct_r);
        assert_eq!((ce.lhs, ce.rhs), (direct_l, direct_r));
        // re-centred at the mass point it holds again
        assert!(symmetry_check(&sobolev_form(&moved), &int(1), 1, 6).unwrap().holds);

        for n in 0..4 {
            let pure = SobolevSpec::new(laguerre_moments(1, 40), int(0), n, Matrix::zeros(n + 1, n + 1)).unwrap();
            assert!(symmetry_check(&sobolev_form(&pure), &int(0), n, 6).unwrap().holds);
        }
    }

    #[test]
    fn closure_form() {
        let mu = laguerre_moments(0, 20);
        let form = ClosureForm::new(19, move |f: &Poly, g: &Poly| mu.integrate(f, g));
        assert_eq!(gram_matrix(&form, 1).unwrap(), Matrix::from_ints(&[&[1, 1], &[1, 2]]));
    }
}
