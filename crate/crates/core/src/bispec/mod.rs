//! Right-acting matrix differential operators with the folded sequence as
//! eigenfunctions.

pub mod conjugation;
pub mod discover;
pub mod operator;

pub use conjugation::{
    conjugation_eval, cross_match, cyclotomic, hermite_operator, ConjugationEval, FoldConjugationData,
};
pub use discover::{
    discover_operator, discover_scalar_operator, min_order_check, Discovery, MinOrderReport, OrderCertificate,
    ScalarOperator,
};
pub use operator::{
    apply_right, laguerre_sobolev_eigenvalue, reference_operator, verify_eigen, EigenReport, EigenRow,
    EigenvalueLadder, RightDifferentialOperator,
};
