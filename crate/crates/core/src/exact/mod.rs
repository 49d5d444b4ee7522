//! Exact arithmetic: rationals, polynomials, dense/banded/block matrices and
//! the linear solvers used throughout the crate.

pub mod banded;
pub mod block;
pub mod matrix;
pub mod poly;
pub mod polymatrix;
pub mod rational;

pub use banded::BandedOperator;
pub use block::BlockTridiagonal;
pub use matrix::{ldlt, nullspace, solve_linear, Matrix, RowEchelon};
pub use poly::Poly;
pub use polymatrix::PolyMatrix;
pub use rational::{int, rat, Rational};

/// `k`-th derivative of `p`.
pub fn poly_derivative(p: &Poly, k: usize) -> Poly {
    p.derivative(k)
}

/// Returns `q` with `q(x) = p(x + c)`.
pub fn poly_shift_compose(p: &Poly, c: &Rational) -> Poly {
    p.shift_compose(c)
}
