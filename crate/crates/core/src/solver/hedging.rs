use alloc::vec::Vec;

use super::{kkt_residual, IterationRecord, Problem, Solution, Status};
use crate::error::{Error, Result};
use crate::operators::{check_gamma, composite_resolvent, ConstraintSpec, OperatorSpec};
use crate::policy::{project_complement_unchecked, project_nonanticipative_unchecked, Policy};

fn composite_supported(op: &OperatorSpec, cs: &ConstraintSpec) -> bool {
    matches!(
        (op, cs),
        (
            OperatorSpec::DiagonalAffine { .. } | OperatorSpec::GradSeparableQuadratic { .. },
            ConstraintSpec::WholeSpace | ConstraintSpec::Box { .. }
        )
    )
}

/// Classical progressive hedging from `x_0 = 0`, `v*_0 = 0`:
///
/// ```text
/// a(ξ) = J_{γ(A(ξ,·) + N_{C(ξ)})}(x(ξ) − γ v*(ξ))
/// x⁺   = proj_V a
/// v*⁺  = v* + γ⁻¹ proj_{V⊥} a
/// ```
///
/// Every scenario needs a closed-form composite resolvent. The stopping test
/// uses the KKT residual with the constraint multiplier implied by the last
/// resolvent, `γ⁻¹(x − γv* − a) − A(a)`.
pub fn progressive_hedging_solve(problem: &Problem, gamma: f64, tol: f64, max_iter: usize) -> Result<Solution> {
    progressive_hedging_run(problem, gamma, tol, max_iter, |_| {})
}

/// [`progressive_hedging_solve`] calling `observer` with every trace record.
pub fn progressive_hedging_run<O: FnMut(&IterationRecord)>(
    problem: &Problem,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    mut observer: O,
) -> Result<Solution> {
    check_gamma(gamma)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ToleranceError(tol));
    }
    let tree = problem.tree();
    for (s, (op, cs)) in problem.operators().iter().zip(problem.constraints()).enumerate() {
        if !composite_supported(op, cs) {
            return Err(Error::UnsupportedComposite { scenario: Some(s) });
        }
    }

    let mut x = Policy::zeros_for(tree);
    let mut v_star = Policy::zeros_for(tree);
    let mut x_star = Policy::zeros_for(tree);
    let mut a = Policy::zeros_for(tree);
    let mut trace = Vec::new();
    let mut status = Status::MaxIter;
    let mut residual = kkt_residual(problem, &x, &x_star, &v_star)?;
    let mut iterations = 0;
    let all: Vec<usize> = (0..tree.len()).collect();

    while iterations < max_iter {
        for s in 0..tree.len() {
            let op = &problem.operators()[s];
            let z: Vec<f64> = x.row(s).iter().zip(v_star.row(s)).map(|(x, v)| x - gamma * v).collect();
            let p = composite_resolvent(op, &problem.constraints()[s], gamma, &z)?;
            let ap = op.apply(&p).expect("composite-supported operators are single-valued");
            for i in 0..p.len() {
                x_star.row_mut(s)[i] = (z[i] - p[i]) / gamma - ap[i];
            }
            a.row_mut(s).copy_from_slice(&p);
        }
        x = project_nonanticipative_unchecked(tree, &a);
        v_star.axpy(1.0 / gamma, &project_complement_unchecked(tree, &a))?;
        iterations += 1;

        residual = kkt_residual(problem, &x, &x_star, &v_star)?;
        let record = IterationRecord {
            n: iterations,
            kappa: f64::NAN,
            tau: f64::NAN,
            theta: f64::NAN,
            residual,
            active: all.clone(),
        };
        observer(&record);
        trace.push(record);
        if residual <= tol {
            status = Status::Converged;
            break;
        }
    }

    Ok(Solution {
        x_bar: x,
        x_star_bar: x_star,
        v_star_bar: v_star,
        status,
        iterations,
        residual,
        trace,
    })
}
