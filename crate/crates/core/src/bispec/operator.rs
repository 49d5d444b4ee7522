//! Right-acting matrix differential operators `F -> sum_k F^{(k)} D_k(y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{self, int, Rational};
use crate::exact::{Matrix, Poly, PolyMatrix};
use crate::matfold::MatrixPolySequence;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightDifferentialOperator {
    size: usize,
    coeffs: Vec<PolyMatrix>,
}

impl RightDifferentialOperator {
    /// Trailing zero coefficients are dropped; the zero operator keeps a
    /// single zero `D_0`.
    pub fn new(size: usize, mut coeffs: Vec<PolyMatrix>) -> Result<Self> {
        if coeffs
            .iter()
            .any(|c| !c.is_zero() && (c.rows() != size || c.cols() != size))
        {
            return Err(Error::DimensionMismatch(format!("coefficients must be {size}x{size}")));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(PolyMatrix::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(PolyMatrix::zero(size, size));
        }
        let coeffs = coeffs
            .into_iter()
            .map(|c| if c.is_zero() { PolyMatrix::zero(size, size) } else { c })
            .collect();
        Ok(Self { size, coeffs })
    }

    pub fn zero(size: usize) -> Self {
        Self {
            size,
            coeffs: vec![PolyMatrix::zero(size, size)],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PolyMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> PolyMatrix {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| PolyMatrix::zero(self.size, self.size))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PolyMatrix::is_zero)
    }

    /// Copy with entry `(i, j)` of `D_k` changed by `delta * y^power`.
    pub fn perturbed(&self, k: usize, i: usize, j: usize, power: usize, delta: &Rational) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= k {
            coeffs.resize(k + 1, PolyMatrix::zero(self.size, self.size));
        }
        let mut entries = if coeffs[k].is_zero() {
            vec![vec![Poly::zero(); self.size]; self.size]
        } else {
            coeffs[k].entries()
        };
        entries[i][j] = &entries[i][j] + &Poly::monomial(power, delta.clone());
        coeffs[k] = PolyMatrix::from_entries(&entries);
        Self::new(self.size, coeffs).expect("same shape")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(OperatorJson::from(self)).expect("plain data")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: OperatorJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        j.try_into()
    }
}

/// `sum_k F^{(k)} D_k`, exactly.
pub fn apply_right(f: &PolyMatrix, op: &RightDifferentialOperator) -> Result<PolyMatrix> {
    if f.cols() != op.size {
        return Err(Error::DimensionMismatch(format!(
            "{} columns against a {}x{} operator",
            f.cols(),
            op.size,
            op.size
        )));
    }
    let mut out = PolyMatrix::zero(f.rows(), op.size);
    for (k, d) in op.coeffs.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let fk = f.derivative(k);
        if fk.is_zero() {
            break;
        }
        out = &out + &(&fk * d);
    }
    Ok(out)
}

impl fmt::Display for RightDifferentialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.coeffs.iter().enumerate() {
            let rows: Vec<String> = (0..self.size)
                .map(|i| {
                    let cells: Vec<String> = (0..self.size).map(|j| d.entry(i, j).to_string()).collect();
                    format!("[{}]", cells.join(", "))
                })
                .collect();
            writeln!(f, "D_{k} = [{}]", rows.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    k: usize,
    i: usize,
    j: usize,
    coeffs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    order: usize,
    #[serde(rename = "N")]
    n: usize,
    coefficients: Vec<EntryJson>,
}

impl From<&RightDifferentialOperator> for OperatorJson {
    fn from(op: &RightDifferentialOperator) -> Self {
        let mut coefficients = Vec::new();
        for (k, d) in op.coeffs.iter().enumerate() {
            for i in 0..op.size {
                for j in 0..op.size {
                    let e = if d.is_zero() { Poly::zero() } else { d.entry(i, j) };
                    if !e.is_zero() {
                        coefficients.push(EntryJson {
                            k,
                            i,
                            j,
                            coeffs: e.coeffs().iter().map(rational::format).collect(),
                        });
                    }
                }
            }
        }
        Self {
            order: op.order(),
            n: op.size - 1,
            coefficients,
        }
    }
}

impl TryFrom<OperatorJson> for RightDifferentialOperator {
    type Error = Error;
    fn try_from(j: OperatorJson) -> Result<Self> {
        let size = j.n + 1;
        let mut entries = vec![vec![vec![Poly::zero(); size]; size]; j.order + 1];
        for e in j.coefficients {
            if e.k > j.order || e.i >= size || e.j >= size {
                return Err(Error::Parse(format!("entry ({}, {}, {}) out of range", e.k, e.i, e.j)));
            }
            let cs = e
                .coeffs
                .iter()
                .map(|s| rational::parse(s))
                .collect::<Result<Vec<_>>>()?;
            entries[e.k][e.i][e.j] = Poly::new(cs);
        }
        let coeffs = entries.iter().map(|m| PolyMatrix::from_entries(m)).collect();
        let op = Self::new(size, coeffs)?;
        if op.order() != j.order {
            return Err(Error::Parse(format!(
                "declared order {} but D_{} is zero",
                j.order, j.order
            )));
        }
        Ok(op)
    }
}

type ScalarLadder = Arc<dyn Fn(usize) -> Rational + Send + Sync>;

/// Diagonal eigenvalue matrices `Lambda_n = diag(lambda_{(N+1)n + j})`
/// generated from a scalar eigenvalue sequence, with optional overrides.
#[derive(Clone)]
pub struct EigenvalueLadder {
    size: usize,
    scalar: ScalarLadder,
    overrides: BTreeMap<usize, Rational>,
}

impl fmt::Debug for EigenvalueLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenvalueLadder")
            .field("size", &self.size)
            .field("overrides", &self.overrides)
            .finish_non_exhaustive()
    }
}

impl EigenvalueLadder {
    pub fn from_scalar(size: usize, scalar: impl Fn(usize) -> Rational + Send + Sync + 'static) -> Self {
        Self {
            size,
            scalar: Arc::new(scalar),
            overrides: BTreeMap::new(),
        }
    }

    pub fn zero(size: usize) -> Self {
        Self::from_scalar(size, |_| Rational::zero())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Scalar eigenvalue `lambda_m`.
    pub fn value(&self, m: usize) -> Rational {
        self.overrides.get(&m).cloned().unwrap_or_else(|| (self.scalar)(m))
    }

    pub fn lambda(&self, n: usize) -> Matrix {
        let d: Vec<Rational> = (0..self.size).map(|j| self.value(self.size * n + j)).collect();
        Matrix::diagonal(&d)
    }

    /// Adds `delta` to diagonal entry `j` of `Lambda_n`.
    pub fn perturbed(&self, n: usize, j: usize, delta: &Rational) -> Self {
        let mut out = self.clone();
        let m = self.size * n + j;
        out.overrides.insert(m, self.value(m) + delta);
        out
    }
}

/// `lambda_m = m (m^3 - m + 12) / 4`, so that
/// `Lambda_n = diag((4n^3 - n + 6) n, (2n^3 + 3n^2 + n + 3)(2n + 1))`.
pub fn laguerre_sobolev_eigenvalue(m: usize) -> Rational {
    let m = int(m as i64);
    &m * (&m * &m * &m - &m + int(12)) / int(4)
}

/// The order-8 operator for the folded Laguerre–Sobolev sequence
/// (`alpha = 0`, `c = 0`, `N = 1`, unit mass on `f'(0)`) and its ladder.
pub fn reference_operator() -> (RightDifferentialOperator, EigenvalueLadder) {
    let p = |cs: &[i64]| Poly::from_ints(cs);
    // entries as coefficient lists in y, ascending
    let d: Vec<[[Poly; 2]; 2]> = vec![
        [[p(&[]), p(&[])], [p(&[-3]), p(&[3])]],
        [[p(&[-6, 9]), p(&[-12])], [p(&[54, -105]), p(&[0, 24])]],
        [
            [p(&[-72, 474, 27]), p(&[0, -276])],
            [p(&[0, -2754, -906]), p(&[0, 3300, 57])],
        ],
        [
            [p(&[0, 2232, 3984, 24]), p(&[0, -6840, -636])],
            [p(&[0, 0, -27408, -1148]), p(&[0, 17640, 10224, 32])],
        ],
        [
            [p(&[0, 0, 18804, 4320, 4]), p(&[0, 0, -18024, -296])],
            [p(&[0, 0, 0, -39264, -376]), p(&[0, 0, 57204, 7080, 4])],
        ],
        [
            [p(&[0, 0, 0, 24192, 1248]), p(&[0, 0, 0, -11136, -32])],
            [p(&[0, 0, 0, 0, -17088, -32]), p(&[0, 0, 0, 47232, 1536])],
        ],
        [
            [p(&[0, 0, 0, 0, 9696, 96]), p(&[0, 0, 0, 0, -2208])],
            [p(&[0, 0, 0, 0, 0, -2656]), p(&[0, 0, 0, 0, 14176, 96])],
        ],
        [
            [p(&[0, 0, 0, 0, 0, 1408]), p(&[0, 0, 0, 0, 0, -128])],
            [p(&[0, 0, 0, 0, 0, 0, -128]), p(&[0, 0, 0, 0, 0, 1664])],
        ],
        [
            [p(&[0, 0, 0, 0, 0, 0, 64]), p(&[])],
            [p(&[]), p(&[0, 0, 0, 0, 0, 0, 64])],
        ],
    ];
    let coeffs = d
        .into_iter()
        .map(|m| PolyMatrix::from_entries(&m.map(|row| row.to_vec())))
        .collect();
    (
        RightDifferentialOperator::new(2, coeffs).expect("2x2 coefficients"),
        EigenvalueLadder::from_scalar(2, laguerre_sobolev_eigenvalue),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenRow {
    pub n: usize,
    pub zero_residual: bool,
    /// Largest absolute residual coefficient.
    #[serde(with = "rational::serde_str")]
    pub residual: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenReport {
    pub rows: Vec<EigenRow>,
}

impl EigenReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.zero_residual)
    }

    pub fn failing(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| !r.zero_residual).map(|r| r.n).collect()
    }
}

/// Residual `R_n D - Lambda_n R_n` for each `n` in `range`.
pub fn verify_eigen(
    r: &MatrixPolySequence,
    op: &RightDifferentialOperator,
    ladder: &EigenvalueLadder,
    range: std::ops::RangeInclusive<usize>,
) -> Result<EigenReport> {
    let mut rows = Vec::new();
    for n in range {
        if n >= r.len() {
            return Err(Error::InsufficientSequence {
                needed: n + 1,
                available: r.len(),
            });
        }
        let rn = r.get(n);
        let residual = &apply_right(rn, op)? - &rn.left_mul(&ladder.lambda(n));
        rows.push(EigenRow {
            n,
            zero_residual: residual.is_zero(),
            residual: residual.max_abs(),
        });
    }
    Ok(EigenReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfold::build_matrix_sequence;
    use crate::measures::{laguerre_moments, sobolev_form, SobolevSpec};
    use crate::orthopoly::monic_sequence;

    fn row(entries: &[Poly]) -> PolyMatrix {
        PolyMatrix::from_entries(&[entries.to_vec()])
    }

    #[test]
    fn spot_rows() {
        let (op, ladder) = reference_operator();
        assert_eq!(op.order(), 8);
        assert_eq!(ladder.lambda(1), Matrix::diagonal(&[int(9), int(27)]));
        assert_eq!(
            op.coeff(0),
            PolyMatrix::constant(Matrix::from_ints(&[&[0, 0], &[-3, 3]]))
        );
        let p = |cs: &[i64]| Poly::from_ints(cs);
        assert_eq!(
            apply_right(&row(&[p(&[1]), p(&[])]), &op).unwrap(),
            PolyMatrix::zero(1, 2)
        );
        let r1 = row(&[p(&[-1]), p(&[1])]);
        assert_eq!(apply_right(&r1, &op).unwrap(), r1.scale(&int(3)));
        // oracle: (y, -2) D_0 + (1, 0) D_1 by hand
        let r2 = row(&[p(&[0, 1]), p(&[-2])]);
        let by_hand = &(&r2 * &op.coeff(0)) + &(&row(&[p(&[1]), p(&[])]) * &op.coeff(1));
        assert_eq!(by_hand, r2.scale(&int(9)));
        assert_eq!(apply_right(&r2, &op).unwrap(), by_hand);
    }

    fn paper_sequence(n: usize) -> MatrixPolySequence {
        let form =
            sobolev_form(&SobolevSpec::top_derivative(laguerre_moments(0, 4 * n + 8), int(0), 1, int(1)).unwrap());
        build_matrix_sequence(&monic_sequence(&form, 2 * n + 1).unwrap(), &int(0), 1).unwrap()
    }

    #[test]
    fn paper_operator_eigen() {
        let r = paper_sequence(8);
        let (op, ladder) = reference_operator();
        assert!(verify_eigen(&r, &op, &ladder, 0..=8).unwrap().passes());
        let bad = verify_eigen(&r, &op, &ladder.perturbed(3, 0, &int(1)), 0..=8).unwrap();
        assert_eq!(bad.failing(), vec![3]);
        let zero = verify_eigen(
            &r,
            &RightDifferentialOperator::zero(2),
            &EigenvalueLadder::zero(2),
            0..=8,
        )
        .unwrap();
        assert!(zero.passes());
    }

    #[test]
    fn json_round_trip() {
        let (op, _) = reference_operator();
        let v = op.to_json();
        assert_eq!(v["order"], 8);
        assert_eq!(RightDifferentialOperator::from_json(&v).unwrap(), op);
    }

    #[test]
    fn linearity() {
        let (op, _) = reference_operator();
        let p = |cs: &[i64]| Poly::from_ints(cs);
        let f = row(&[p(&[1, 2, 3]), p(&[0, -1])]);
        let g = row(&[p(&[4, 0, 0, 1]), p(&[2])]);
        assert_eq!(
            apply_right(&(&f + &g), &op).unwrap(),
            &apply_right(&f, &op).unwrap() + &apply_right(&g, &op).unwrap()
        );
        assert!(apply_right(&PolyMatrix::from_entries(&[vec![p(&[1])]]), &op).is_err());
    }
}
