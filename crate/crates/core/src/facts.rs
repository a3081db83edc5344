//! Executes the machine-checkable facts bundled with gallery problems, and
//! assembles full diagnostics reports.
//!
//! Every fact maps to exactly one PASS/FAIL row with the measured values in
//! the detail string; failed facts are never silently dropped. Floats in the
//! detail strings are formatted with fixed precision so that two runs of the
//! same configuration produce byte-identical reports.

use serde::Serialize;

use crate::error::Result;
use crate::gallery::{Fact, FactCheck, GalleryProblem, TargetVector};
use crate::krylov::{
    build_krylov_basis, core_condition_decay, distance_at_order, distance_series,
    escape_indicator, image_span_distance, krylov_intersection, reducibility_defects,
    DiagnosticsReport, KrylovBasis,
};
use crate::linop::HVector;

/// Outcome of one executed fact.
#[derive(Debug, Clone, Serialize)]
pub struct FactOutcome {
    pub problem: String,
    pub fact: String,
    pub description: String,
    pub pass: bool,
    pub detail: String,
}

/// Aggregate of a full fact sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub rows: Vec<FactOutcome>,
    pub passed: usize,
    pub failed: usize,
}

fn resolve<'a>(problem: &'a GalleryProblem, target: &'a TargetVector) -> Result<&'a HVector> {
    match target {
        TargetVector::Datum => Ok(&problem.g),
        TargetVector::Vector(v) => Ok(v),
        TargetVector::KnownSolution => problem.known_solution.as_ref().ok_or_else(|| {
            crate::error::KrylovError::InvalidParameter(format!(
                "problem `{}` has no known solution to compare against",
                problem.id
            ))
        }),
    }
}

/// Largest basis order any fact of the problem needs.
fn max_basis_order(problem: &GalleryProblem) -> usize {
    let mut order = 1;
    for fact in &problem.facts {
        let needed = match &fact.check {
            FactCheck::DistanceEquals { orders, .. } => orders.iter().copied().max().unwrap_or(1),
            FactCheck::DistanceBelow { max_order, .. } => *max_order,
            FactCheck::DistanceDecreasing { max_order, .. } => *max_order,
            FactCheck::DistanceAtLeast { order, .. } => *order,
            FactCheck::LogDistanceSlopeAtMost { order_hi, .. } => *order_hi,
            FactCheck::ImageSpanDistanceEquals { order, .. } => *order,
            FactCheck::IntersectionDim { order, .. } => *order,
            FactCheck::ReducibilityDefectsAtMost { order, .. } => *order,
            FactCheck::EscapeIndicatorEquals { order, .. } => *order,
            _ => 1,
        };
        order = order.max(needed);
    }
    order
}

/// Least-squares slope of `ln(d)` against the order.
fn log_slope(series: &[(usize, f64)]) -> f64 {
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|&(k, _)| k as f64).collect();
    let ys: Vec<f64> = series
        .iter()
        .map(|&(_, d)| d.max(1e-300).ln())
        .collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (x - mean_x) * (y - mean_y))
        .sum();
    let var: f64 = xs.iter().map(|&x| (x - mean_x) * (x - mean_x)).sum();
    cov / var
}

fn check_decreasing(series: &[(usize, f64)], floor: f64) -> (bool, String) {
    for w in series.windows(2) {
        let (n0, d0) = w[0];
        let (n1, d1) = w[1];
        if d1 > d0 + 1e-12 {
            return (
                false,
                format!("increase {d0:.6e} -> {d1:.6e} between orders {n0} and {n1}"),
            );
        }
        if d0 > floor && d1 >= d0 {
            return (
                false,
                format!("no strict decrease {d0:.6e} -> {d1:.6e} between orders {n0} and {n1}"),
            );
        }
    }
    (true, "decreasing".into())
}

fn run_check(
    problem: &GalleryProblem,
    fact: &Fact,
    basis: Option<&KrylovBasis>,
) -> Result<(bool, String)> {
    let op = &problem.op;
    match &fact.check {
        FactCheck::KnownSolutionResidual { tol } => {
            let f = resolve(problem, &TargetVector::KnownSolution)?;
            let residual = op.apply(f)?.sub(&problem.g)?.norm();
            let bound = tol * problem.g.norm().max(1.0);
            Ok((
                residual <= bound,
                format!("|Af - g| = {residual:.6e} (bound {bound:.6e})"),
            ))
        }
        FactCheck::ApplyElemEquals {
            input,
            expected,
            tol,
        } => {
            let out = op.apply_element(input)?;
            let err = out.sub(expected)?.norm();
            Ok((err <= *tol, format!("|Ax - expected| = {err:.6e}")))
        }
        FactCheck::ApplyNormEquals {
            input,
            expected,
            tol,
        } => {
            let value = op.apply(input)?.norm();
            Ok((
                (value - expected).abs() <= *tol,
                format!("|Av| = {value:.6e} (expected {expected:.6e})"),
            ))
        }
        FactCheck::GraphNormEquals {
            input,
            expected,
            tol,
        } => {
            let value = op.graph_norm(input)?;
            Ok((
                (value - expected).abs() <= *tol,
                format!("graph norm = {value:.6e} (expected {expected:.6e})"),
            ))
        }
        FactCheck::NormSquaredEquals {
            target,
            expected,
            tol,
        } => {
            let v = resolve(problem, target)?;
            let value = v.norm_sqr();
            Ok((
                (value - expected).abs() <= *tol,
                format!("|v|^2 = {value:.12e} (expected {expected:.12e})"),
            ))
        }
        FactCheck::PowerResidualNorm {
            power,
            scale,
            reference,
            expected,
            tol,
        } => {
            let mut w = problem.g.clone();
            for _ in 0..*power {
                w = op.apply(&w)?;
            }
            let w = w
                .scale(num_complex::Complex64::new(*scale, 0.0))
                .sub(reference)?;
            let value = w.norm();
            Ok((
                (value - expected).abs() <= *tol,
                format!("|scale A^k g - ref| = {value:.9e} (expected {expected:.9e})"),
            ))
        }
        FactCheck::DistanceEquals {
            target,
            orders,
            expected,
            tol,
        } => {
            let f = resolve(problem, target)?;
            let basis = basis.expect("basis prepared");
            let series = distance_series(basis, f, orders)?;
            for &(n, d) in &series {
                if (d - expected).abs() > *tol {
                    return Ok((
                        false,
                        format!("dist at order {n} is {d:.6e}, expected {expected:.6e}"),
                    ));
                }
            }
            Ok((
                true,
                format!("distance = {expected:.6e} at all {} orders", orders.len()),
            ))
        }
        FactCheck::DistanceBelow {
            target,
            threshold,
            max_order,
        } => {
            let f = resolve(problem, target)?;
            let basis = basis.expect("basis prepared");
            let limit = (*max_order).min(basis.order());
            for n in 1..=limit {
                let d = distance_at_order(basis, n, f)?;
                if d < *threshold {
                    return Ok((true, format!("dist = {d:.6e} at order {n}")));
                }
            }
            let last = distance_at_order(basis, limit, f)?;
            Ok((
                false,
                format!("still {last:.6e} at order {limit} (threshold {threshold:.1e})"),
            ))
        }
        FactCheck::DistanceDecreasing {
            target,
            max_order,
            floor,
        } => {
            let f = resolve(problem, target)?;
            let basis = basis.expect("basis prepared");
            let limit = (*max_order).min(basis.order());
            let orders: Vec<usize> = (1..=limit).collect();
            let series = distance_series(basis, f, &orders)?;
            Ok(check_decreasing(&series, *floor))
        }
        FactCheck::DistanceAtLeast {
            target,
            order,
            lower,
        } => {
            let f = resolve(problem, target)?;
            let basis = basis.expect("basis prepared");
            let d = distance_at_order(basis, *order, f)?;
            Ok((
                d >= *lower,
                format!("dist = {d:.9e} (lower bound {lower:.9e})"),
            ))
        }
        FactCheck::LogDistanceSlopeAtMost {
            target,
            order_lo,
            order_hi,
            max_slope,
        } => {
            let f = resolve(problem, target)?;
            let basis = basis.expect("basis prepared");
            let orders: Vec<usize> = (*order_lo..=*order_hi).collect();
            let series = distance_series(basis, f, &orders)?;
            let slope = log_slope(&series);
            Ok((
                slope <= *max_slope,
                format!("log-distance slope = {slope:.4} (cap {max_slope:.2})"),
            ))
        }
        FactCheck::ImageSpanDistanceEquals {
            target,
            order,
            expected,
            tol,
        } => {
            let f = resolve(problem, target)?;
            let basis = basis.expect("basis prepared");
            let d = image_span_distance(op, basis, *order, f)?;
            Ok((
                (d - expected).abs() <= *tol,
                format!("dist to image span = {d:.6e} (expected {expected:.6e})"),
            ))
        }
        FactCheck::IntersectionDim {
            expected,
            tol,
            max_smallest_angle,
            ..
        } => {
            let basis = basis.expect("basis prepared");
            let report = krylov_intersection(op, basis, *tol)?;
            let mut pass = report.dim == *expected;
            let mut detail = format!("dim = {}", report.dim);
            if let (Some(cap), Some(&angle)) = (max_smallest_angle, report.angles.first()) {
                detail.push_str(&format!(", smallest angle = {angle:.3e}"));
                if *expected > 0 {
                    pass = pass && angle < *cap;
                }
            }
            Ok((pass, detail))
        }
        FactCheck::ReducibilityDefectsAtMost { tol, .. } => {
            let basis = basis.expect("basis prepared");
            let report = reducibility_defects(op, basis, *tol)?;
            Ok((
                report.reduced_at_scale,
                format!("d1 = {:.3e}, d2 = {:.3e}", report.d1, report.d2),
            ))
        }
        FactCheck::EscapeIndicatorEquals {
            x,
            expected,
            tol,
            membership_tol,
            ..
        } => {
            let basis = basis.expect("basis prepared");
            let report = escape_indicator(op, basis, x, *membership_tol)?;
            let pass = (report.indicator - expected).abs() <= *tol && report.conclusive;
            Ok((
                pass,
                format!(
                    "indicator = {:.12e}, membership distance = {:.3e}{}",
                    report.indicator,
                    report.membership_distance,
                    if report.conclusive {
                        ""
                    } else {
                        " (inconclusive)"
                    }
                ),
            ))
        }
        FactCheck::CoreDecayBelow {
            x,
            orders,
            threshold,
        } => {
            let report = core_condition_decay(op, &problem.g, x, orders)?;
            let (monotone, why) = check_decreasing(&report.series, 1e-12);
            let last = report.series.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
            let pass = monotone && last < *threshold;
            Ok((
                pass,
                format!(
                    "final graph distance = {last:.6e} (threshold {threshold:.1e}); {why}"
                ),
            ))
        }
        FactCheck::KernelDimEquals { expected } => {
            let a = op.materialize()?;
            let svd = a
                .try_svd(false, false, 1e-14, 10_000)
                .ok_or_else(|| crate::error::KrylovError::Numerical("SVD did not converge".into()))?;
            let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let dim = svd
                .singular_values
                .iter()
                .filter(|&&s| s <= 1e-10 * smax)
                .count();
            Ok((
                dim == *expected,
                format!("kernel dimension = {dim} (expected {expected})"),
            ))
        }
    }
}

/// Runs every fact of one problem, building the Krylov basis once at the
/// largest order any fact needs.
pub fn run_problem(problem: &GalleryProblem) -> Result<Vec<FactOutcome>> {
    let needs_basis = problem.facts.iter().any(|f| {
        !matches!(
            f.check,
            FactCheck::KnownSolutionResidual { .. }
                | FactCheck::ApplyElemEquals { .. }
                | FactCheck::ApplyNormEquals { .. }
                | FactCheck::GraphNormEquals { .. }
                | FactCheck::NormSquaredEquals { .. }
                | FactCheck::PowerResidualNorm { .. }
                | FactCheck::CoreDecayBelow { .. }
                | FactCheck::KernelDimEquals { .. }
        )
    });
    let basis = if needs_basis {
        Some(build_krylov_basis(
            &problem.op,
            &problem.g,
            max_basis_order(problem),
        )?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(problem.facts.len());
    for fact in &problem.facts {
        let (pass, detail) = match run_check(problem, fact, basis.as_ref()) {
            Ok(outcome) => outcome,
            Err(e) => (false, format!("error: {e}")),
        };
        rows.push(FactOutcome {
            problem: problem.id.clone(),
            fact: fact.id.clone(),
            description: fact.description.clone(),
            pass,
            detail,
        });
    }
    Ok(rows)
}

/// Runs the full default gallery and aggregates the PASS/FAIL rows.
pub fn reproduce_examples() -> Result<ReproduceReport> {
    let mut rows = Vec::new();
    for problem in crate::gallery::default_problems()? {
        rows.extend(run_problem(&problem)?);
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let failed = rows.len() - passed;
    Ok(ReproduceReport {
        rows,
        passed,
        failed,
    })
}

/// Options for a diagnostics sweep over one problem.
#[derive(Debug, Clone)]
pub struct DiagnoseOptions {
    /// Orders at which the distance and decay series are sampled.
    pub orders: Vec<usize>,
    pub intersection_tol: f64,
    pub reducibility_tol: f64,
    pub membership_tol: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            orders: vec![5, 10, 20],
            intersection_tol: crate::krylov::DEFAULT_INTERSECTION_TOL,
            reducibility_tol: 1e-10,
            membership_tol: crate::krylov::DEFAULT_MEMBERSHIP_TOL,
        }
    }
}

/// Full structural diagnostics of one problem: distance series for the known
/// solution, Krylov intersection, reducibility defects, escape indicator and
/// graph-norm decay for the bundled probes.
pub fn diagnose(problem: &GalleryProblem, opts: &DiagnoseOptions) -> Result<DiagnosticsReport> {
    let mut orders = opts.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let max_order = orders.iter().copied().max().unwrap_or(5).max(1);
    let basis = build_krylov_basis(&problem.op, &problem.g, max_order)?;

    let distances = match &problem.known_solution {
        Some(f) => distance_series(&basis, f, &orders)?,
        None => Vec::new(),
    };
    let intersection = Some(krylov_intersection(
        &problem.op,
        &basis,
        opts.intersection_tol,
    )?);
    let reducibility = Some(reducibility_defects(
        &problem.op,
        &basis,
        opts.reducibility_tol,
    )?);
    let escape = match &problem.escape_probe {
        Some(x) => Some(escape_indicator(
            &problem.op,
            &basis,
            x,
            opts.membership_tol,
        )?),
        None => None,
    };
    let core_decay = match &problem.core_probe {
        Some(x) => Some(core_condition_decay(&problem.op, &problem.g, x, &orders)?),
        None => None,
    };

    let mut notes = problem.notes.clone();
    notes.push(
        "whether the Krylov projection of a solution stays inside the operator domain \
         is not testable at a finite truncation; no diagnostic here assumes it"
            .into(),
    );
    if let Some(b) = basis.breakdown_at() {
        notes.push(format!(
            "power sequence became numerically dependent at order {b}; \
             the Krylov space is exhausted there"
        ));
    }

    Ok(DiagnosticsReport {
        problem: problem.id.clone(),
        truncation: problem.truncation,
        basis_order: basis.order(),
        breakdown_at: basis.breakdown_at(),
        distances,
        intersection,
        reducibility,
        escape,
        core_decay,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn right_shift_facts_all_pass() {
        let p = gallery::right_shift_problem(64).unwrap();
        // Clamp fact orders to the smaller test window: rebuild with defaults
        // would be slower; instead run the default problem below in the
        // integration suite. Here just check the runner wiring.
        let rows = run_problem(&p).unwrap();
        assert_eq!(rows.len(), p.facts.len());
        for row in &rows {
            assert!(row.pass, "{}/{}: {}", row.problem, row.fact, row.detail);
        }
    }

    #[test]
    fn diagnose_produces_increasing_series_indices() {
        let p = gallery::weighted_shift_np1(20).unwrap();
        let report = diagnose(&p, &DiagnoseOptions::default()).unwrap();
        let idx: Vec<usize> = report
            .core_decay
            .as_ref()
            .unwrap()
            .series
            .iter()
            .map(|&(n, _)| n)
            .collect();
        for w in idx.windows(2) {
            assert!(w[1] > w[0]);
        }
        for &(_, d) in &report.core_decay.as_ref().unwrap().series {
            assert!(d.is_finite());
        }
    }

    #[test]
    fn diagnose_escape_problem_reports_indicator_one() {
        let p = gallery::escape_operator(20, 0.5).unwrap();
        let opts = DiagnoseOptions {
            orders: vec![5, 10, 20],
            ..DiagnoseOptions::default()
        };
        let report = diagnose(&p, &opts).unwrap();
        let escape = report.escape.unwrap();
        assert!((escape.indicator - 1.0).abs() < 1e-12);
        assert!(escape.conclusive);
        // The plain-coordinate block is diagonal, hence structurally reduced.
        let red = report.reducibility.unwrap();
        assert!(red.d1 <= 1e-10 && red.d2 <= 1e-10);
        assert_eq!(report.intersection.unwrap().dim, 0);
    }
}
