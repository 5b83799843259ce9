//! Independent reference optima for canonical problems.
//!
//! Everything here exists to *certify* bounds produced by the first-order
//! solver, so it deliberately shares no code with it: the LP path is a dense
//! bounded-variable two-phase simplex, the QP path a dense predictor-corrector
//! interior-point method. Both are written for certification-sized problems
//! and refuse anything over [`MAX_REFERENCE_VARS`] variables.
//!
//! Returned multipliers use the Lagrangian sign convention
//! `L(x, λ, μ) = x᷆ᵀMx + cᵀx + λᵀ(Ax−b) + μᵀ(Cx−d)`, so plugging them into the
//! concentrated dual objective reproduces the primal optimum (strong duality).

mod ipm;
mod simplex;

use nalgebra::DVector;
use thiserror::Error;

use crate::canonical::{CanonicalProblem, ProblemKind};

/// Largest decision-vector size the dense reference solvers accept.
pub const MAX_REFERENCE_VARS: usize = 200;

/// An optimal point of a canonical problem with its certificate multipliers.
#[derive(Debug, Clone)]
pub struct PrimalSolution {
    /// Optimal point in ball coordinates.
    pub x: DVector<f64>,
    /// Optimal value in canonical cost units, *excluding* the problem offset.
    pub objective: f64,
    /// Multipliers on the equality rows (λ).
    pub eq_duals: DVector<f64>,
    /// Multipliers on the inequality rows (μ ≥ 0).
    pub ineq_duals: DVector<f64>,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("problem has {vars} variables; the dense reference solvers accept at most {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("problem is infeasible")]
    Infeasible,
    /// Unreachable for canonical problems (the unit ball bounds every
    /// direction) but kept so hand-built data cannot panic the solver.
    #[error("problem is unbounded below")]
    Unbounded,
    #[error("the simplex path requires zero quadratic cost, found m_quad[{0}] != 0")]
    QuadraticCost(usize),
    #[error("reference solve failed: {0}")]
    NumericalFailure(String),
}

impl From<String> for OracleError {
    fn from(msg: String) -> Self {
        OracleError::NumericalFailure(msg)
    }
}

fn check_size(prob: &CanonicalProblem) -> Result<(), OracleError> {
    if prob.n_vars() > MAX_REFERENCE_VARS {
        return Err(OracleError::TooLarge { vars: prob.n_vars(), limit: MAX_REFERENCE_VARS });
    }
    Ok(())
}

/// Solves a canonical problem with the solver matching its kind:
/// simplex for [`ProblemKind::Lp`], interior point for [`ProblemKind::Qp`].
pub fn solve_reference(prob: &CanonicalProblem) -> Result<PrimalSolution, OracleError> {
    match prob.kind {
        ProblemKind::Lp => solve_with_simplex(prob),
        ProblemKind::Qp => solve_with_interior_point(prob),
    }
}

/// Solves with the bounded-variable simplex. Requires a purely linear
/// objective; quadratic problems are rejected rather than silently relaxed.
pub fn solve_with_simplex(prob: &CanonicalProblem) -> Result<PrimalSolution, OracleError> {
    check_size(prob)?;
    if let Some(i) = (0..prob.m_quad.len()).find(|&i| prob.m_quad[i] != 0.0) {
        return Err(OracleError::QuadraticCost(i));
    }
    let out = simplex::solve_bounded_lp(
        &prob.eq_matrix,
        &prob.eq_rhs,
        &prob.ineq_matrix,
        &prob.ineq_rhs,
        &prob.cost,
    )?;
    match out {
        simplex::SimplexOutcome::Infeasible => Err(OracleError::Infeasible),
        simplex::SimplexOutcome::Unbounded => Err(OracleError::Unbounded),
        simplex::SimplexOutcome::Optimal(sol) => {
            let m_a = prob.eq_matrix.nrows();
            // λ = −π on equality rows, μ = −π on inequality rows; μ is
            // nonnegative at optimality up to roundoff, so clamp the noise.
            let eq_duals = DVector::from_fn(m_a, |i, _| -sol.pi[i]);
            let ineq_duals =
                DVector::from_fn(prob.ineq_matrix.nrows(), |i, _| (-sol.pi[m_a + i]).max(0.0));
            Ok(PrimalSolution { x: sol.x, objective: sol.objective, eq_duals, ineq_duals })
        }
    }
}

/// Solves with the interior-point method. Accepts any diagonal `m_quad ≥ 0`,
/// including all zeros, which makes it an independent cross-check of the
/// simplex path.
pub fn solve_with_interior_point(prob: &CanonicalProblem) -> Result<PrimalSolution, OracleError> {
    check_size(prob)?;
    if let Some(i) = (0..prob.m_quad.len()).find(|&i| prob.m_quad[i] < 0.0) {
        return Err(OracleError::NumericalFailure(format!(
            "m_quad[{i}] is negative; the problem is not convex"
        )));
    }
    let sol = ipm::solve_diag_qp(
        &prob.m_quad,
        &prob.cost,
        &prob.eq_matrix,
        &prob.eq_rhs,
        &prob.ineq_matrix,
        &prob.ineq_rhs,
    )?;
    Ok(PrimalSolution {
        x: sol.x,
        objective: sol.objective,
        eq_duals: sol.y,
        ineq_duals: sol.z,
    })
}

/// How far a point is from satisfying every canonical constraint.
#[derive(Debug, Clone, Copy)]
pub struct FeasibilityReport {
    pub max_eq_violation: f64,
    pub max_ineq_violation: f64,
    pub max_box_violation: f64,
}

impl FeasibilityReport {
    pub fn worst(&self) -> f64 {
        self.max_eq_violation.max(self.max_ineq_violation).max(self.max_box_violation)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

/// Measures constraint violations of a ball point.
pub fn check_primal_feasible(prob: &CanonicalProblem, x: &DVector<f64>) -> FeasibilityReport {
    let eq = &prob.eq_matrix * x - &prob.eq_rhs;
    let ineq = &prob.ineq_matrix * x - &prob.ineq_rhs;
    FeasibilityReport {
        max_eq_violation: eq.amax(),
        max_ineq_violation: ineq.iter().fold(0.0, |a, &v| a.max(v)),
        max_box_violation: x.iter().fold(0.0, |a, &v| a.max(v.abs() - 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{canonicalize, CanonicalProblem, NormalizationMap, ProblemKind};
    use crate::case::parse_case;
    use crate::fixtures;
    use crate::ptdf::build_ptdf;
    use nalgebra::{DMatrix, DVector};

    fn canon(text: &str, kind: ProblemKind) -> CanonicalProblem {
        let net = parse_case(text).unwrap();
        let ptdf = build_ptdf(&net).unwrap();
        canonicalize(&net, &ptdf, kind).unwrap()
    }

    /// Concentrated dual objective at given multipliers — independent
    /// transcription of the closed form, used to certify strong duality.
    fn dual_value(prob: &CanonicalProblem, lam: &DVector<f64>, mu: &DVector<f64>) -> f64 {
        let r = &prob.cost + prob.eq_matrix.transpose() * lam + prob.ineq_matrix.transpose() * mu;
        let inner: f64 = (0..r.len())
            .map(|i| {
                let (m, ri) = (prob.m_quad[i], r[i]);
                if m > 0.0 {
                    if ri.abs() <= 2.0 * m { -ri * ri / (4.0 * m) } else { m - ri.abs() }
                } else {
                    -ri.abs()
                }
            })
            .sum();
        inner - lam.dot(&prob.eq_rhs) - mu.dot(&prob.ineq_rhs)
    }

    #[test]
    fn two_bus_unconstrained_optimum() {
        let prob = canon(fixtures::CASE2, ProblemKind::Lp);
        let sol = solve_reference(&prob).unwrap();
        let dollars = (sol.objective + prob.offset) * prob.cost_scale;
        assert!((dollars - 500.0).abs() <= 1e-9, "got {dollars}");
        assert!(check_primal_feasible(&prob, &sol.x).is_feasible(1e-9));
    }

    #[test]
    fn single_bus_forced_dispatch() {
        let prob = canon(fixtures::CASE1DEG, ProblemKind::Lp);
        let sol = solve_reference(&prob).unwrap();
        let dollars = (sol.objective + prob.offset) * prob.cost_scale;
        assert!((dollars - 250.0).abs() <= 1e-9, "got {dollars}");
        assert!(sol.x[0].abs() <= 1e-12); // balance pins the only variable
    }

    /// Brute-force vertex enumeration: with n variables and one equality row,
    /// every basic solution activates n−1 further constraints drawn from the
    /// inequality rows and the box faces. Minimizing over all feasible basic
    /// solutions certifies the simplex answer from first principles.
    #[test]
    fn simplex_matches_vertex_enumeration() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let n = prob.n_vars();
        assert_eq!(n, 3);
        let m_c = prob.ineq_matrix.nrows();
        // Candidate active rows: inequality rows, then +x_j ≤ 1, then −x_j ≤ 1.
        let row = |k: usize| -> (DVector<f64>, f64) {
            if k < m_c {
                (prob.ineq_matrix.row(k).transpose(), prob.ineq_rhs[k])
            } else if k < m_c + n {
                let mut v = DVector::zeros(n);
                v[k - m_c] = 1.0;
                (v, 1.0)
            } else {
                let mut v = DVector::zeros(n);
                v[k - m_c - n] = -1.0;
                (v, 1.0)
            }
        };
        let total = m_c + 2 * n;
        let mut best = f64::INFINITY;
        for i in 0..total {
            for j in (i + 1)..total {
                let (ri, di) = row(i);
                let (rj, dj) = row(j);
                let mut m = DMatrix::zeros(3, 3);
                m.row_mut(0).copy_from(&prob.eq_matrix.row(0));
                m.row_mut(1).copy_from(&ri.transpose());
                m.row_mut(2).copy_from(&rj.transpose());
                let rhs = DVector::from_column_slice(&[prob.eq_rhs[0], di, dj]);
                let Some(x) = m.lu().solve(&rhs) else { continue };
                if check_primal_feasible(&prob, &x).is_feasible(1e-8) {
                    best = best.min(prob.cost.dot(&x));
                }
            }
        }
        let sol = solve_with_simplex(&prob).unwrap();
        assert!(
            (sol.objective - best).abs() <= 1e-9 * best.abs(),
            "simplex {} vs enumeration {best}",
            sol.objective
        );
    }

    #[test]
    fn simplex_multipliers_reproduce_optimum_through_dual() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let sol = solve_with_simplex(&prob).unwrap();
        let g = dual_value(&prob, &sol.eq_duals, &sol.ineq_duals);
        assert!(
            (g - sol.objective).abs() <= 1e-6 * sol.objective.abs().max(1.0),
            "dual {g} vs primal {}",
            sol.objective
        );
        assert!(sol.ineq_duals.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn interior_point_multipliers_reproduce_optimum_through_dual() {
        for text in [fixtures::CASE5Q, fixtures::CASE3Q] {
            let prob = canon(text, ProblemKind::Qp);
            let sol = solve_with_interior_point(&prob).unwrap();
            assert!(check_primal_feasible(&prob, &sol.x).is_feasible(1e-7));
            let g = dual_value(&prob, &sol.eq_duals, &sol.ineq_duals);
            assert!(
                (g - sol.objective).abs() <= 1e-6 * sol.objective.abs().max(1.0),
                "dual {g} vs primal {}",
                sol.objective
            );
        }
    }

    #[test]
    fn lp_routes_agree_when_quadratic_terms_vanish() {
        let lp = canon(fixtures::CASE5, ProblemKind::Lp);
        let qp = canon(fixtures::CASE5, ProblemKind::Qp); // m_quad all zero
        let a = solve_with_simplex(&lp).unwrap();
        let b = solve_with_interior_point(&qp).unwrap();
        assert!(
            (a.objective - b.objective).abs() <= 1e-7 * a.objective.abs().max(1.0),
            "simplex {} vs interior point {}",
            a.objective,
            b.objective
        );
    }

    #[test]
    fn frozen_fixture_optima() {
        // The LP value is certified by the vertex-enumeration test above.
        // The triangle QP is exact by hand: equal reactances split flows 2:1,
        // so the 0.85 pu limit on line 1-3 pins p3 = 0.475 pu and the cost
        // comes to exactly 7245.875 $/h.
        let lp = canon(fixtures::CASE5, ProblemKind::Lp);
        let sol = solve_reference(&lp).unwrap();
        let dollars = (sol.objective + lp.offset) * lp.cost_scale;
        assert!((dollars - 17305.915141430950).abs() <= 1e-8, "got {dollars}");

        let qp = canon(fixtures::CASE5Q, ProblemKind::Qp);
        let sol = solve_reference(&qp).unwrap();
        let dollars = (sol.objective + qp.offset) * qp.cost_scale;
        assert!((dollars - 20198.876810992886).abs() <= 1e-6 * dollars, "got {dollars}");

        let tri = canon(fixtures::CASE3Q, ProblemKind::Qp);
        let sol = solve_reference(&tri).unwrap();
        let dollars = (sol.objective + tri.offset) * tri.cost_scale;
        assert!((dollars - 7245.875).abs() <= 1e-6 * dollars, "got {dollars}");
    }

    #[test]
    fn infeasible_balance_is_detected() {
        let mut net = parse_case(fixtures::CASE2).unwrap();
        net.buses[1].load = 100.0;
        let ptdf = build_ptdf(&net).unwrap();
        let prob = canonicalize(&net, &ptdf, ProblemKind::Lp).unwrap();
        match solve_with_simplex(&prob) {
            Err(OracleError::Infeasible) => {}
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn oversized_problems_are_refused() {
        let n = MAX_REFERENCE_VARS + 1;
        let lower = DVector::from_element(n, -1.0);
        let upper = DVector::from_element(n, 1.0);
        let prob = CanonicalProblem {
            kind: ProblemKind::Lp,
            m_quad: DVector::zeros(n),
            cost: DVector::from_element(n, 1.0),
            eq_matrix: DMatrix::from_element(1, n, 1.0),
            eq_rhs: DVector::zeros(1),
            ineq_matrix: DMatrix::zeros(0, n),
            ineq_rhs: DVector::zeros(0),
            offset: 0.0,
            t_bound: None,
            cost_scale: 1.0,
            map: NormalizationMap {
                scale: DVector::from_element(n, 1.0),
                shift: DVector::zeros(n),
                lower,
                upper,
            },
            free_gens: (0..n).collect(),
            fixed_gens: Vec::new(),
            warnings: Vec::new(),
        };
        match solve_reference(&prob) {
            Err(OracleError::TooLarge { vars, limit }) => {
                assert_eq!((vars, limit), (n, MAX_REFERENCE_VARS));
            }
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn feasibility_report_flags_violations() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let sol = solve_reference(&prob).unwrap();
        let ok = check_primal_feasible(&prob, &sol.x);
        assert!(ok.is_feasible(1e-8));
        let mut bad = sol.x.clone();
        bad[0] += 0.5; // breaks the balance row
        let report = check_primal_feasible(&prob, &bad);
        assert!(report.max_eq_violation > 0.1);
        assert!(!report.is_feasible(1e-8));
    }
}
