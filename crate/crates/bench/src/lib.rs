//! Fixtures shared by the benchmarks.

use opfold_core::exact::rational::int;
use opfold_core::matfold::{build_matrix_sequence, MatrixPolySequence};
use opfold_core::measures::{laguerre_moments, sobolev_form, SobolevForm, SobolevSpec};
use opfold_core::orthopoly::{monic_sequence, MonicSequence};

/// Laguerre–Sobolev form with unit mass on `f'(0)`, enough moments for
/// `n_max` polynomials.
pub fn laguerre_sobolev(n_max: usize) -> SobolevForm {
    sobolev_form(
        &SobolevSpec::top_derivative(laguerre_moments(0, 2 * n_max + 8), int(0), 1, int(1)).expect("valid spec"),
    )
}

pub fn sequence(n_max: usize) -> MonicSequence {
    monic_sequence(&laguerre_sobolev(n_max), n_max).expect("positive definite")
}

/// Folded sequence `R_0 .. R_n`.
pub fn folded(n: usize) -> MatrixPolySequence {
    build_matrix_sequence(&sequence(2 * n + 1), &int(0), 1).expect("fold")
}
