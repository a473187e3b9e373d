//! `decompose`, `bound2x2` and `verify`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use posprod::{cross_validate_factors, decide_2x2, decompose as run_pipeline, ComplexMatrix, HermitianMatrix, Tolerances};
use serde::Serialize;

use crate::error::CliError;
use crate::matrix_file::read_matrix;
use crate::report::{RunReport, Status};
use crate::{Bound2x2Args, DecomposeArgs, Exit, VerifyArgs};

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(CliError::Output)
}

fn to_json<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

fn write_trace(path: &Path, iterations: &[usize], errors: &[f64]) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Trace {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(&e))?;
    w.write_record(["iteration", "error"]).map_err(|e| fail(&e))?;
    for (k, e) in iterations.iter().zip(errors) {
        w.write_record([k.to_string(), format!("{e:e}")]).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

pub fn decompose(args: &DecomposeArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let a = read_matrix(&args.input)?;
    let config = args.solver.config();
    let outcome = run_pipeline(&a, &config)?;
    let report = RunReport::new(&outcome, &config);

    if let Some(path) = &args.trace {
        let solve = match &outcome {
            posprod::DecomposeOutcome::Decomposed(run) => Some(&run.solve),
            posprod::DecomposeOutcome::Rejected(rej) => rej.solve.as_ref(),
        };
        let (its, errs) = solve.map_or((&[][..], &[][..]), |s| {
            (&s.error_history.iterations[..], &s.error_history.errors[..])
        });
        write_trace(path, its, errs)?;
    }

    if args.json {
        emit(out, &to_json(&report))?;
    } else {
        emit(out, &format!("status: {} (stage {})", report.status.as_str(), report.stage))?;
        if let Some(reason) = &report.reason {
            emit(out, &format!("reason: {reason}"))?;
        }
        if report.provable {
            emit(out, "provably not a product of two positive contractions")?;
        }
        let which = if report.status == Status::Decomposed { "" } else { "candidate " };
        emit(out, &format!("{which}||PQ - A||_F: {}", opt(report.residual)))?;
        emit(out, &format!("{which}||P||: {}  ||Q||: {}", opt(report.p_norm), opt(report.q_norm)))?;
        emit(
            out,
            &format!("iterations: {}  feasibility error: {}", report.iterations, opt(report.feasibility_error)),
        )?;
    }
    Ok(match report.status {
        Status::Decomposed => Exit::Success,
        Status::Rejected | Status::Stalled => Exit::Negative,
    })
}

#[derive(Debug, Serialize)]
struct BoundReport {
    a: f64,
    b: f64,
    p: f64,
    bound: f64,
    feasible: bool,
}

pub fn bound2x2(args: &Bound2x2Args, out: &mut dyn Write) -> Result<Exit, CliError> {
    let tol = Tolerances::default();
    let verdict = decide_2x2(args.a, args.b, Complex::new(args.p, 0.0), tol.boundary_tol)?;
    let word = if verdict.feasible { "feasible" } else { "infeasible" };
    emit(out, &format!("bound {:.10}, |p| = {}: {word}", verdict.bound, verdict.p_abs))?;
    let doc = BoundReport {
        a: args.a,
        b: args.b,
        p: args.p,
        bound: verdict.bound,
        feasible: verdict.feasible,
    };
    emit(out, &serde_json::to_string(&doc).expect("serializes"))?;
    Ok(if verdict.feasible { Exit::Success } else { Exit::Negative })
}

/// One check performed by `verify`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    pass: bool,
    checks: Vec<Check>,
}

fn factor_checks(label: &str, m: &ComplexMatrix, tol: &Tolerances) -> posprod::Result<(HermitianMatrix, Vec<Check>)> {
    let h = HermitianMatrix::symmetrize(m.clone());
    let ev = h.eigenvalues()?;
    let lo = ev.first().copied().unwrap_or(0.0);
    let norm = ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let checks = vec![
        Check::at_most(format!("{label} Hermitian"), m.hermitian_defect(), tol.hermitian_tol),
        Check::at_most(format!("{label} PSD (-lambda_min)"), -lo, tol.psd_tol),
        Check::at_most(format!("{label} contraction (norm)"), norm, 1.0 + tol.norm_tol),
    ];
    Ok((h, checks))
}

/// The checks `verify` performs, in order.
pub fn verify_checks(
    a: &ComplexMatrix,
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    cross_validate: bool,
    tol: &Tolerances,
) -> Result<Vec<Check>, posprod::Error> {
    a.ensure_square()?;
    let n = a.rows();
    for (name, m) in [("P", p), ("Q", q)] {
        if m.rows() != n || m.cols() != n {
            return Err(posprod::Error::DimensionMismatch(format!(
                "{name} is {}x{}, A is {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let (ph, mut checks) = factor_checks("P", p, tol)?;
    let (qh, q_checks) = factor_checks("Q", q, tol)?;
    checks.extend(q_checks);
    checks.push(Check::at_most("PQ = A (Frobenius)", (&(p * q) - a).frobenius_norm(), tol.decomp_tol));
    if cross_validate {
        let report = cross_validate_factors(a, &ph, &qh, tol)?;
        let limit = tol.dil_tol * a.frobenius_norm().max(1.0);
        for (name, value) in [
            ("dilated P idempotent", report.p_idempotence),
            ("dilated P Hermitian", report.p_hermitian),
            ("dilated Q idempotent", report.q_idempotence),
            ("dilated Q Hermitian", report.q_hermitian),
            ("dilated product block = A", report.product_block),
        ] {
            checks.push(Check::at_most(name, value, limit));
        }
    }
    Ok(checks)
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let a = read_matrix(&args.a)?;
    let p = read_matrix(&args.p)?;
    let q = read_matrix(&args.q)?;
    let checks = verify_checks(&a, &p, &q, args.cross_validate, &Tolerances::default()).map_err(|e| match e {
        posprod::Error::DimensionMismatch(message) => CliError::DimensionMismatch {
            path: args.a.clone(),
            message,
        },
        other => CliError::Numerical(other),
    })?;
    let pass = checks.iter().all(|c| c.pass);
    if args.json {
        emit(out, &to_json(&VerifyReport { pass, checks }))?;
    } else {
        for c in &checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            emit(out, &format!("{tag} {}: {:.3e} (limit {:.3e})", c.name, c.value, c.limit))?;
        }
    }
    Ok(if pass { Exit::Success } else { Exit::Negative })
}
