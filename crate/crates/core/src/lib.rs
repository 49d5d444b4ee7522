//! Exact computation of Sobolev-type orthogonal polynomials, their banded
//! recurrences, Darboux factorizations, matrix folding and bispectral
//! operators.

#![allow(clippy::needless_range_loop)]

pub mod bispec;
pub mod darboux;
pub mod error;
pub mod exact;
pub mod matfold;
pub mod measures;
pub mod orthopoly;

pub use error::{Error, Result};
pub use exact::{BandedOperator, BlockTridiagonal, Matrix, Poly, PolyMatrix, Rational};
