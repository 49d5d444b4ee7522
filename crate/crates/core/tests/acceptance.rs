//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits nonzero only when a failure is not one of the known, analysed
//! discrepancies (see `KNOWN_ZETA`).

use std::process::ExitCode;
use std::time::Instant;

use opfold_core::bispec::{
    apply_right, conjugation_eval, cross_match, discover_operator, discover_scalar_operator, hermite_operator,
    laguerre_sobolev_eigenvalue, min_order_check, reference_operator, verify_eigen, EigenvalueLadder,
};
use opfold_core::darboux::{
    band_ldlt, block_lu, darboux_report, verify_ul_identity, w_interlace_check, BandFactorization,
};
use opfold_core::exact::rational::{int, rat};
use opfold_core::matfold::{build_matrix_sequence, compare_ab, matrix_ttrr, monic_block_jacobi, monic_fold};
use opfold_core::measures::{hermite_moments, laguerre_moments, sobolev_form, symmetry_check, SobolevSpec};
use opfold_core::orthopoly::{
    banded_recurrence, connection_matrix, jacobi_matrix, monic_sequence, monic_sequence_quasi, reference_abc,
};
use opfold_core::{Poly, PolyMatrix, Rational};

type Check = Result<(), String>;

struct Outcome {
    id: u32,
    title: &'static str,
    result: Check,
    /// Failure explained elsewhere (known discrepancy in the source material).
    known: Option<&'static str>,
    notes: Vec<String>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn paper_spec(count: usize) -> SobolevSpec {
    SobolevSpec::top_derivative(laguerre_moments(0, count), int(0), 1, int(1)).unwrap()
}

fn grid() -> Vec<(u64, i64, usize)> {
    let mut g = Vec::new();
    for alpha in 0..=2 {
        for c in 0..=1 {
            for order in 1..=2 {
                g.push((alpha, c, order));
            }
        }
    }
    g
}

fn scalar_recurrence() -> Check {
    let form = sobolev_form(&paper_spec(120));
    let seq = monic_sequence(&form, 26).map_err(e2s)?;
    let rec = banded_recurrence(&seq, &int(0), 1).map_err(e2s)?;
    for n in 0..=20 {
        let r = reference_abc(n as u64);
        let a = rec.orthonormal(n, n + 2).square;
        let b = rec.orthonormal(n, n + 1).square;
        let c = rec.h.get(n, n);
        ensure(a == r.a_sq && b == r.b_sq && c == r.c, || {
            format!("n={n}: got ({a}, {b}, {c})")
        })?;
    }
    ensure(
        rec.orthonormal(0, 2).square == int(12) && rec.orthonormal(0, 1).square == int(8) && rec.h.get(0, 0) == int(2),
        || "spot values".into(),
    )
}

fn theorem_a(notes: &mut Vec<String>) -> Check {
    let mut worst = 0.0f64;
    for (alpha, c, order) in grid() {
        let base = laguerre_moments(alpha, 140);
        let spec = SobolevSpec::top_derivative(base.clone(), int(c), order, int(1)).map_err(e2s)?;
        let seq = monic_sequence(&sobolev_form(&spec), 20).map_err(e2s)?;
        let rec = banded_recurrence(&seq, &int(c), order).map_err(e2s)?;
        let fact = band_ldlt(&rec).map_err(e2s)?;
        let shifted = base.christoffel_shift(&int(c), order + 1).map_err(e2s)?;
        let p = monic_sequence_quasi(&shifted, 20).map_err(e2s)?;
        let rep = verify_ul_identity(&rec, &jacobi_matrix(&p).map_err(e2s)?, &fact)
            .map_err(|e| format!("(alpha={alpha}, c={c}, N={order}): {e}"))?;
        ensure(rep.h_exact && rep.ul_exact && rep.trusted > 0, || {
            format!("({alpha},{c},{order}) not exact")
        })?;
        worst = worst.max(rep.h_float_deviation).max(rep.ul_float_deviation);
        ensure(worst <= 1e-10, || {
            format!("({alpha},{c},{order}) float deviation {worst:e}")
        })?;
        if (alpha, c, order) == (0, 0, 1) {
            ensure(rep.corner == int(12), || format!("corner {}", rep.corner))?;
        }
    }
    notes.push(format!("worst orthonormal float deviation {worst:.1e}"));
    Ok(())
}

fn corollary() -> Check {
    for (alpha, c, order) in grid() {
        let base = laguerre_moments(alpha, 140);
        let spec = SobolevSpec::top_derivative(base.clone(), int(c), order, int(1)).map_err(e2s)?;
        let plain = spec.without_mass();
        let q = monic_sequence(&sobolev_form(&plain), 20).map_err(e2s)?;
        let rec = banded_recurrence(&q, &int(c), order).map_err(e2s)?;
        // without the mass, H is the power of the shifted Jacobi matrix
        let jq = jacobi_matrix(&q).map_err(e2s)?;
        let power = jq.monic_operator().shift(&int(c)).pow(order + 1);
        for n in 0..jq.len().saturating_sub(order + 1) {
            for k in rec.h.band_cols(n) {
                ensure(k >= power.size() || rec.h.get(n, k) == power.get(n, k), || {
                    format!("({alpha},{c},{order}) H != (J-c)^(N+1) at ({n},{k})")
                })?;
            }
        }
        let shifted = base.christoffel_shift(&int(c), order + 1).map_err(e2s)?;
        let p = monic_sequence_quasi(&shifted, 20).map_err(e2s)?;
        let conn = connection_matrix(&q, &p, &shifted, order + 1).map_err(e2s)?;
        let fact = BandFactorization::from_connection(&conn);
        let rep = verify_ul_identity(&rec, &jacobi_matrix(&p).map_err(e2s)?, &fact)
            .map_err(|e| format!("(alpha={alpha}, c={c}, N={order}): {e}"))?;
        ensure(rep.h_exact && rep.ul_exact, || {
            format!("({alpha},{c},{order}) not exact")
        })?;
    }
    Ok(())
}

fn laguerre_sobolev_folds(
    n_scalar: usize,
) -> Result<
    (
        opfold_core::matfold::MatrixPolySequence,
        opfold_core::matfold::MatrixPolySequence,
    ),
    String,
> {
    let base = laguerre_moments(0, 2 * n_scalar + 10);
    let form = sobolev_form(&SobolevSpec::top_derivative(base.clone(), int(0), 1, int(1)).map_err(e2s)?);
    let s = monic_sequence(&form, n_scalar).map_err(e2s)?;
    let shifted = base.christoffel_shift(&int(0), 2).map_err(e2s)?;
    let p = monic_sequence(&shifted, n_scalar).map_err(e2s)?;
    Ok((
        monic_fold(&s, &int(0), 1).map_err(e2s)?,
        monic_fold(&p, &int(0), 1).map_err(e2s)?,
    ))
}

fn block_darboux(notes: &mut Vec<String>) -> Check {
    let (pm, qm) = laguerre_sobolev_folds(27)?;
    let jp = monic_block_jacobi(&pm).map_err(e2s)?;
    let jq = monic_block_jacobi(&qm).map_err(e2s)?;
    let report = darboux_report(&jp, &jq, 11, true).map_err(e2s)?;
    ensure(report.rows.len() == 11, || format!("only {} rows", report.rows.len()))?;
    for r in &report.rows {
        ensure(r.lu_match, || format!("LU != J_P at n={}", r.n))?;
        ensure(r.ul_match == Some(true), || format!("UL != J_Q at n={}", r.n))?;
        ensure(r.sum_match == Some(true), || format!("sum display at n={}", r.n))?;
    }
    let products: Vec<String> = report
        .products
        .iter()
        .map(|p| format!("n={}:{}", p.n, if p.formula_matches_q { "match" } else { "mismatch" }))
        .collect();
    notes.push(format!(
        "REPORT product display vs zeta_(2n+1) zeta_(2n) and Q recurrence: {}",
        products.join(" ")
    ));
    notes.push(format!("REPORT product verdict: {}", report.product_verdict));
    let exchanged = report.rows[1..].iter().all(|r| r.zeta_match_exchanged == Some(true));
    notes.push(format!(
        "zeta closed forms with labels exchanged: {}",
        if exchanged { "all match" } else { "mismatch" }
    ));
    ensure(exchanged, || "zeta closed forms fail even with labels exchanged".into())?;
    ensure(report.zeta_labels_hold(), || {
        "zeta closed forms do not hold under their printed labels (zeta_1 = [[0,2],[-3,9]], zeta_2 = [[-12,6],[-117,51]])"
            .into()
    })
}

fn matrix_ttrr_check() -> Check {
    let form = sobolev_form(&paper_spec(130));
    let seq = monic_sequence(&form, 27).map_err(e2s)?;
    let r = build_matrix_sequence(&seq, &int(0), 1).map_err(e2s)?;
    let rec = banded_recurrence(&seq, &int(0), 1).map_err(e2s)?;
    let coeffs = matrix_ttrr(&r, &rec).map_err(e2s)?;
    let cmp = compare_ab(&coeffs, 11).map_err(e2s)?;
    ensure(cmp.per_n.len() == 11 && cmp.all_match(), || {
        format!("{:?}", cmp.per_n.iter().find(|m| !m.squares_match || !m.signs_match))
    })?;
    let b0 = coeffs.b_orth(0);
    ensure(
        b0[0][0].exact() == Some(int(2)) && b0[1][1].exact() == Some(int(7)) && b0[0][1].square == int(8),
        || "B_0 spot values".into(),
    )?;
    ensure(
        (0..coeffs.len()).all(|n| coeffs.a_orth(n)[0][1].square == Rational::from_integer(0.into())),
        || "A_n (0,1) entry nonzero".into(),
    )
}

fn w_interlacing(notes: &mut Vec<String>) -> Check {
    let (pm, qm) = laguerre_sobolev_folds(27)?;
    let jp = monic_block_jacobi(&pm).map_err(e2s)?;
    let (_, _, zetas) = block_lu(&jp).map_err(e2s)?;
    let checked = w_interlace_check(&pm, &qm, &zetas, 20).map_err(e2s)?;
    notes.push(format!("{checked} polynomial identities"));
    ensure(checked == 21, || format!("checked {checked}"))
}

fn paper_r(n: usize) -> Result<opfold_core::matfold::MatrixPolySequence, String> {
    let form = sobolev_form(&paper_spec(4 * n + 12));
    build_matrix_sequence(&monic_sequence(&form, 2 * n + 1).map_err(e2s)?, &int(0), 1).map_err(e2s)
}

fn row(cs: &[&[i64]]) -> PolyMatrix {
    PolyMatrix::from_entries(&[cs.iter().map(|c| Poly::from_ints(c)).collect()])
}

fn operator_eigen() -> Check {
    let r = paper_r(8)?;
    let (op, ladder) = reference_operator();
    let report = verify_eigen(&r, &op, &ladder, 0..=8).map_err(e2s)?;
    ensure(report.passes(), || format!("failing n: {:?}", report.failing()))?;
    let r1 = row(&[&[-1], &[1]]);
    ensure(apply_right(&r1, &op).map_err(e2s)? == r1.scale(&int(3)), || {
        "row (-1, 1)".into()
    })?;
    let r2 = row(&[&[0, 1], &[-2]]);
    ensure(apply_right(&r2, &op).map_err(e2s)? == r2.scale(&int(9)), || {
        "row (y, -2)".into()
    })
}

fn discovery(notes: &mut Vec<String>) -> Check {
    let r = paper_r(12)?;
    let (op, ladder) = reference_operator();
    let found = discover_operator(&r, &ladder, 8, 6, 12).map_err(e2s)?;
    ensure(found.operator == op, || {
        "discovered operator differs from the transcription".into()
    })?;
    ensure(found.nullspace_dim == 0 && found.verified, || "not unique".into())?;
    let report = min_order_check(&r, 8, 12, None).map_err(e2s)?;
    notes.push(format!(
        "nullspace dims by order: {:?}",
        report.certificates.iter().map(|c| c.nullspace_dim).collect::<Vec<_>>()
    ));
    ensure(report.minimal_order == Some(8), || {
        format!("minimal order {:?}", report.minimal_order)
    })?;
    ensure(
        report.certificates.iter().filter(|c| c.order <= 7).all(|c| !c.feasible),
        || "some order <= 7 feasible".into(),
    )
}

fn conjugation(notes: &mut Vec<String>) -> Check {
    let points = [rat(1, 4), rat(1, 2), int(1), int(3), int(10)];
    let hseq = monic_sequence(&hermite_moments(60), 16).map_err(e2s)?;
    let hop = hermite_operator(17);
    let mut worst = 0.0f64;
    for y0 in &points {
        for n in 0..=6 {
            let e = conjugation_eval(&hop, 1, &hseq, &int(0), n, y0).map_err(e2s)?;
            worst = worst.max(e.deviation);
        }
    }
    ensure(worst < 1e-10, || format!("hermite deviation {worst:e}"))?;
    // eigenvalue matrix of the fold is diag(-4n, -2(2n+1))
    let hladder = EigenvalueLadder::from_scalar(2, |m| int(-2 * m as i64));
    for n in 0..=6i64 {
        ensure(
            hladder.lambda(n as usize) == opfold_core::Matrix::diagonal(&[int(-4 * n), int(-2 * (2 * n + 1))]),
            || format!("Lambda_{n}"),
        )?;
    }

    let form = sobolev_form(&paper_spec(80));
    let seq = monic_sequence(&form, 24).map_err(e2s)?;
    let (scalar, _) = discover_scalar_operator(&seq, laguerre_sobolev_eigenvalue, 8, 8, 24).map_err(e2s)?;
    ensure(scalar.check(&seq), || "scalar operator eigencheck".into())?;
    let r = build_matrix_sequence(&seq, &int(0), 1).map_err(e2s)?;
    let (matrix_op, _) = reference_operator();
    let mut worst_paper = 0.0f64;
    for y0 in &points {
        for n in 0..=6 {
            let e = conjugation_eval(&scalar, 1, &seq, &int(0), n, y0).map_err(e2s)?;
            worst_paper = worst_paper
                .max(e.deviation)
                .max(cross_match(&e, &r, &matrix_op).map_err(e2s)?);
        }
    }
    notes.push(format!(
        "worst deviation: folded Hermite {worst:.1e}, conjugation vs discovery {worst_paper:.1e}"
    ));
    ensure(worst_paper < 1e-8, || {
        format!("paper sequence deviation {worst_paper:e}")
    })
}

fn symmetry() -> Check {
    for (alpha, c, order) in grid() {
        let spec = SobolevSpec::top_derivative(laguerre_moments(alpha, 60), int(c), order, int(1)).map_err(e2s)?;
        let rep = symmetry_check(&sobolev_form(&spec), &int(c), order, 12).map_err(e2s)?;
        ensure(rep.holds, || format!("({alpha},{c},{order}) {:?}", rep.counterexample))?;
        let other = int(1 - c);
        let bad = symmetry_check(&sobolev_form(&spec), &other, order, 12).map_err(e2s)?;
        ensure(!bad.holds && bad.counterexample.is_some(), || {
            format!("({alpha},{c},{order}) mismatch not detected")
        })?;
    }
    Ok(())
}

const KNOWN_ZETA: &str =
    "the zeta closed forms hold with their labels exchanged; LU = J_P forces zeta_1 to be the first diagonal block";

fn main() -> ExitCode {
    let start = Instant::now();
    let mut outcomes = Vec::new();
    let mut run = |id, title, known, f: &mut dyn FnMut(&mut Vec<String>) -> Check| {
        let mut notes = Vec::new();
        let t = Instant::now();
        let result = f(&mut notes);
        notes.push(format!("{:.2}s", t.elapsed().as_secs_f64()));
        outcomes.push(Outcome {
            id,
            title,
            result,
            known,
            notes,
        });
    };
    run(
        1,
        "scalar five-term recurrence closed forms, n <= 20",
        None,
        &mut |_| scalar_recurrence(),
    );
    run(
        2,
        "H = T S T* and (J-c)^(N+1) = S T* T on the (alpha, c, N) grid",
        None,
        &mut theorem_a,
    );
    run(
        3,
        "connection factor from the massless sequence on the same grid",
        None,
        &mut |_| corollary(),
    );
    run(
        4,
        "block LU/UL Darboux, zeta closed forms, sum display",
        Some(KNOWN_ZETA),
        &mut block_darboux,
    );
    run(
        5,
        "matrix three-term recurrence blocks up to a fixed sign similarity",
        None,
        &mut |_| matrix_ttrr_check(),
    );
    run(6, "W interlacing identities for n <= 20", None, &mut w_interlacing);
    run(7, "order-8 operator eigen-identity for 0 <= n <= 8", None, &mut |_| {
        operator_eigen()
    });
    run(8, "operator discovery and minimal order 8", None, &mut discovery);
    run(9, "conjugated operator realization", None, &mut conjugation);
    run(10, "symmetry of multiplication by (x-c)^(N+1)", None, &mut |_| {
        symmetry()
    });

    let mut unexplained = 0;
    for o in &outcomes {
        match &o.result {
            Ok(()) => println!("PASS criterion {}: {}", o.id, o.title),
            Err(msg) => {
                println!("FAIL criterion {}: {}: {}", o.id, o.title, msg);
                match o.known {
                    Some(why) => println!("    known discrepancy: {why}"),
                    None => unexplained += 1,
                }
            }
        }
        for n in &o.notes {
            println!("    {n}");
        }
    }
    println!("total {:.2}s", start.elapsed().as_secs_f64());
    if unexplained == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
