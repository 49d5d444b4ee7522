//! Operator discovery by exact linear algebra.
//!
//! Work in the monomial basis `u_{l,j} = e_l y^j` of row-vector polynomials.
//! The folded rows `r_m` (row `j` of `R_n`, `m = (N+1) n + j`) are unit
//! lower triangular in this basis when they come from monic scalar
//! polynomials, so an operator with `r_m D = lambda_m r_m` is pinned down on
//! every `u_p`:
//!
//! `u_p D = sum_m (C^{-1})_{pm} lambda_m r_m`.
//!
//! On the other hand `u_{l,j} D = sum_{k <= j} j!/(j-k)! y^{j-k} rho_{l,k}`,
//! where `rho_{l,k}` is row `l` of `D_k`. This is triangular in `j`, so
//! `D_0, ..., D_order` follow by forward substitution and every `j > order`
//! becomes a consistency constraint. All of it is linear in the eigenvalues,
//! which is what makes the minimal-order search a plain nullspace problem.

use num_traits::{One, Zero};
use serde::Serialize;

use super::operator::{verify_eigen, EigenvalueLadder, RightDifferentialOperator};
use crate::error::{Error, Result};
use crate::exact::rational::{self, big, factorial, falling, Rational};
use crate::exact::{Matrix, Poly, PolyMatrix, RowEchelon};
use crate::matfold::{build_matrix_sequence, MatrixPolySequence, Normalization};
use crate::orthopoly::MonicSequence;

/// Row-vector polynomial: one polynomial per column.
type RowPoly = Vec<Poly>;

fn row_zero(size: usize) -> RowPoly {
    vec![Poly::zero(); size]
}

fn row_axpy(acc: &mut RowPoly, a: &Rational, x: &RowPoly, shift: usize) {
    if a.is_zero() {
        return;
    }
    for (t, s) in acc.iter_mut().zip(x) {
        if !s.is_zero() {
            *t = &*t + &s.shift_up(shift).scale(a);
        }
    }
}

fn row_is_zero(r: &RowPoly) -> bool {
    r.iter().all(Poly::is_zero)
}

/// Basis data shared by discovery and the minimal-order search.
struct Basis {
    size: usize,
    /// `(N+1)(n_fit+1)`
    dim: usize,
    /// Folded rows `r_m`.
    rows: Vec<RowPoly>,
    /// `C^{-1}`, lower triangular.
    cinv: Matrix,
}

impl Basis {
    fn new(r: &MatrixPolySequence, n_fit: usize) -> Result<Self> {
        if r.normalization() != Normalization::ScalarMonic {
            return Err(Error::InvalidSpec(
                "discovery needs folds of monic scalar polynomials".into(),
            ));
        }
        if r.len() <= n_fit {
            return Err(Error::InsufficientSequence {
                needed: n_fit + 1,
                available: r.len(),
            });
        }
        let size = r.block_size();
        let dim = size * (n_fit + 1);
        let rows: Vec<RowPoly> = (0..dim).map(|m| r.get(m / size).row(m % size)).collect();
        let c = Matrix::from_fn(dim, dim, |m, p| rows[m][p % size].coeff(p / size));
        if !c.is_lower_triangular() || (0..dim).any(|i| c[(i, i)].is_zero()) {
            return Err(Error::InvalidSpec(
                "folded rows are not triangular in the monomial basis".into(),
            ));
        }
        // forward substitution for the inverse of a lower triangular matrix
        let mut cinv = Matrix::zeros(dim, dim);
        for col in 0..dim {
            for i in col..dim {
                let mut v = if i == col { Rational::one() } else { Rational::zero() };
                for k in col..i {
                    if !c[(i, k)].is_zero() && !cinv[(k, col)].is_zero() {
                        v -= &c[(i, k)] * &cinv[(k, col)];
                    }
                }
                cinv[(i, col)] = v / &c[(i, i)];
            }
        }
        Ok(Self { size, dim, rows, cinv })
    }

    fn index(&self, l: usize, j: usize) -> usize {
        self.size * j + l
    }

    /// `u_p D` for given eigenvalues.
    fn image(&self, p: usize, lambda: &[Rational]) -> RowPoly {
        let mut out = row_zero(self.size);
        for m in 0..=p {
            let c = &self.cinv[(p, m)] * &lambda[m];
            row_axpy(&mut out, &c, &self.rows[m], 0);
        }
        out
    }

    /// `u_p D` as a linear function of the eigenvalues: entry `m` is the
    /// coefficient row of `lambda_m`.
    fn image_linear(&self, p: usize) -> Vec<RowPoly> {
        (0..self.dim)
            .map(|m| {
                let mut out = row_zero(self.size);
                if m <= p {
                    row_axpy(&mut out, &self.cinv[(p, m)], &self.rows[m], 0);
                }
                out
            })
            .collect()
    }
}

fn falling_r(j: usize, k: usize) -> Rational {
    big(falling(j as u64, k as u64))
}

/// Nullspace dimension of "annihilate `y^j`, `j <= n_fit`" for one entry
/// column of one row: unknowns are the coefficients of `rho_0 .. rho_order`
/// up to `degree_bound`.
fn homogeneous_nullity(order: usize, degree_bound: usize, n_fit: usize) -> usize {
    let per = degree_bound + 1;
    let unknowns = (order + 1) * per;
    let mut ech = RowEchelon::new(unknowns);
    for j in 0..=n_fit {
        // coefficient of y^e in sum_{k <= min(j, order)} falling(j,k) y^{j-k} rho_k
        for e in 0..=(j + degree_bound) {
            let mut row = vec![Rational::zero(); unknowns];
            let mut any = false;
            for k in 0..=j.min(order) {
                let shift = j - k;
                if e >= shift && e - shift <= degree_bound {
                    row[k * per + (e - shift)] = falling_r(j, k);
                    any = true;
                }
            }
            if any {
                ech.push(row);
            }
        }
    }
    unknowns - ech.rank()
}

/// Outcome of [`discover_operator`].
#[derive(Clone, Debug, PartialEq)]
pub struct Discovery {
    pub operator: RightDifferentialOperator,
    /// Dimension of the space of operators (same order and degree bound)
    /// annihilating every fitted `R_n`. Zero means the operator is unique.
    pub nullspace_dim: usize,
    /// The discovered operator reproduces `Lambda_n R_n` for all fitted `n`.
    pub verified: bool,
}

/// Solves `R_n D = Lambda_n R_n` for `n <= n_fit` with `D` of the given
/// order and entry degrees at most `degree_bound`.
pub fn discover_operator(
    r: &MatrixPolySequence,
    ladder: &EigenvalueLadder,
    order: usize,
    degree_bound: usize,
    n_fit: usize,
) -> Result<Discovery> {
    let nullity = homogeneous_nullity(order, degree_bound, n_fit);
    if nullity > 0 {
        return Err(Error::Underdetermined(nullity * r.block_size() * r.block_size()));
    }
    let basis = Basis::new(r, n_fit)?;
    let size = basis.size;
    if ladder.size() != size {
        return Err(Error::DimensionMismatch(
            "ladder and sequence block sizes differ".into(),
        ));
    }
    let lambda: Vec<Rational> = (0..basis.dim).map(|m| ladder.value(m)).collect();
    let mut rho: Vec<Vec<RowPoly>> = vec![Vec::with_capacity(order + 1); size];
    for l in 0..size {
        for j in 0..=n_fit {
            let mut rest = basis.image(basis.index(l, j), &lambda);
            for k in 0..j.min(order + 1) {
                row_axpy(&mut rest, &-falling_r(j, k), &rho[l][k], j - k);
            }
            if j <= order {
                let inv = Rational::one() / big(factorial(j as u64));
                let next: RowPoly = rest.iter().map(|p| p.scale(&inv)).collect();
                if let Some(c) = next.iter().position(|p| p.degree() > degree_bound as isize) {
                    return Err(Error::Infeasible(format!(
                        "entry ({l}, {c}) of D_{j} needs degree {} > {degree_bound}",
                        next[c].degree()
                    )));
                }
                rho[l].push(next);
            } else if !row_is_zero(&rest) {
                return Err(Error::Infeasible(format!(
                    "no operator of order {order} maps y^{j} e_{l} consistently"
                )));
            }
        }
    }
    let coeffs = (0..=order)
        .map(|k| {
            let entries: Vec<Vec<Poly>> = (0..size).map(|l| rho[l][k].clone()).collect();
            PolyMatrix::from_entries(&entries)
        })
        .collect();
    let operator = RightDifferentialOperator::new(size, coeffs)?;
    let verified = verify_eigen(r, &operator, ladder, 0..=n_fit)?.passes();
    Ok(Discovery {
        operator,
        nullspace_dim: 0,
        verified,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCertificate {
    pub order: usize,
    /// Dimension of the eigenvalue solution space (always contains the
    /// constants, i.e. multiples of the identity operator).
    pub nullspace_dim: usize,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinOrderReport {
    pub n_fit: usize,
    pub certificates: Vec<OrderCertificate>,
    /// Smallest order `>= 1` admitting an operator with nonzero top
    /// coefficient.
    pub minimal_order: Option<usize>,
}

/// For each order up to `max_order`, decides whether some operator of that
/// exact order has every fitted `R_n` as eigenfunctions, with the
/// eigenvalues left free.
///
/// Order 0 is reported feasible only when something other than multiples of
/// the identity works (a nontrivial constant right multiplier).
pub fn min_order_check(
    r: &MatrixPolySequence,
    max_order: usize,
    n_fit: usize,
    degree_bound: Option<usize>,
) -> Result<MinOrderReport> {
    if n_fit <= max_order {
        return Err(Error::InsufficientSequence {
            needed: max_order + 2,
            available: n_fit + 1,
        });
    }
    let basis = Basis::new(r, n_fit)?;
    let (size, dim) = (basis.size, basis.dim);
    let images: Vec<Vec<RowPoly>> = (0..dim).map(|p| basis.image_linear(p)).collect();
    // rho[l][k][m]: row l of D_k as a linear function of lambda
    let mut rho: Vec<Vec<Vec<RowPoly>>> = vec![Vec::new(); size];
    for l in 0..size {
        for j in 0..=max_order {
            let mut rest = images[basis.index(l, j)].clone();
            for k in 0..j {
                let f = -falling_r(j, k);
                for (m, part) in rest.iter_mut().enumerate() {
                    row_axpy(part, &f, &rho[l][k][m], j - k);
                }
            }
            let inv = Rational::one() / big(factorial(j as u64));
            rho[l].push(
                rest.iter()
                    .map(|part| part.iter().map(|p| p.scale(&inv)).collect())
                    .collect(),
            );
        }
    }

    let mut certificates = Vec::new();
    for order in 0..=max_order {
        let mut ech = RowEchelon::new(dim);
        let mut add_equations = |lin: &[RowPoly], skip_below: usize| {
            let max_deg = lin.iter().flatten().map(Poly::degree).max().unwrap_or(-1);
            for c in 0..size {
                for e in skip_below..=(max_deg.max(0) as usize) {
                    let row: Vec<Rational> = lin.iter().map(|part| part[c].coeff(e)).collect();
                    if !row.iter().all(Zero::is_zero) {
                        ech.push(row);
                    }
                }
            }
        };
        for l in 0..size {
            if let Some(bound) = degree_bound {
                for k in 0..=order {
                    add_equations(&rho[l][k], bound + 1);
                }
            }
            for j in order + 1..=n_fit {
                let mut rest = images[basis.index(l, j)].clone();
                for k in 0..=order {
                    let f = -falling_r(j, k);
                    for (m, part) in rest.iter_mut().enumerate() {
                        row_axpy(part, &f, &rho[l][k][m], j - k);
                    }
                }
                add_equations(&rest, 0);
            }
        }
        let null = ech.nullspace();
        let nullspace_dim = null.len();
        let feasible = if order == 0 {
            nullspace_dim > 1
        } else {
            null.iter().any(|v| {
                (0..size).any(|l| {
                    let mut top = row_zero(size);
                    for (m, part) in rho[l][order].iter().enumerate() {
                        row_axpy(&mut top, &v[m], part, 0);
                    }
                    !row_is_zero(&top)
                })
            })
        };
        certificates.push(OrderCertificate {
            order,
            nullspace_dim,
            feasible,
        });
    }
    let minimal_order = certificates
        .iter()
        .find(|c| c.order >= 1 && c.feasible)
        .map(|c| c.order);
    Ok(MinOrderReport {
        n_fit,
        certificates,
        minimal_order,
    })
}

/// Scalar differential operator `sum_k a_k(x) d^k/dx^k` with its eigenvalues
/// on a fixed sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarOperator {
    pub coeffs: Vec<Poly>,
    pub eigenvalues: Vec<Rational>,
}

impl ScalarOperator {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Poly::zero(), |acc, (k, a)| &acc + &(a * &p.derivative(k)))
    }

    /// Checks `D s_m = lambda_m s_m` for every stored eigenvalue.
    pub fn check(&self, seq: &MonicSequence) -> bool {
        self.eigenvalues
            .iter()
            .enumerate()
            .take(seq.len())
            .all(|(m, l)| self.apply(seq.get(m)) == seq.get(m).scale(l))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order(),
            "coefficients": self.coeffs.iter()
                .map(|p| p.coeffs().iter().map(rational::format).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Scalar discovery: the `N = 0` case of [`discover_operator`].
pub fn discover_scalar_operator(
    seq: &MonicSequence,
    lambda: impl Fn(usize) -> Rational + Send + Sync + 'static,
    order: usize,
    degree_bound: usize,
    n_fit: usize,
) -> Result<(ScalarOperator, usize)> {
    let r = build_matrix_sequence(seq, &Rational::zero(), 0)?;
    let eigenvalues: Vec<Rational> = (0..=n_fit).map(&lambda).collect();
    let ladder = EigenvalueLadder::from_scalar(1, lambda);
    let found = discover_operator(&r, &ladder, order, degree_bound, n_fit)?;
    let coeffs = found
        .operator
        .coeffs()
        .iter()
        .map(|d| if d.is_zero() { Poly::zero() } else { d.entry(0, 0) })
        .collect();
    Ok((ScalarOperator { coeffs, eigenvalues }, found.nullspace_dim))
}
