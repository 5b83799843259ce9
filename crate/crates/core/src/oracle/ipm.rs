//! Dense predictor-corrector interior-point method for diagonal convex QPs
//! over the unit ∞-ball.
//!
//! Solves `min xᵀ diag(m) x + cᵀx` s.t. `A x = b`, `C x ≤ d`, `‖x‖_∞ ≤ 1`
//! with the box folded into the inequality block `G = [C; I; −I]`. The box
//! rows make the condensed normal matrix positive definite even when `m = 0`,
//! so the same code serves as an LP cross-check. Infeasible start, one
//! factorization per iteration shared by the predictor and corrector steps.

use nalgebra::{DMatrix, DVector};

pub(super) struct IpmSolution {
    pub x: DVector<f64>,
    /// `xᵀ diag(m) x + cᵀx` at the returned point.
    pub objective: f64,
    /// Equality multipliers (λ).
    pub y: DVector<f64>,
    /// Multipliers on the `C x ≤ d` rows only (μ ≥ 0); box multipliers are
    /// internal to the method and not reported.
    pub z: DVector<f64>,
}

const MAX_ITERS: usize = 100;
const KKT_TOL: f64 = 1e-9;

/// Longest step `α ∈ (0, 1]` keeping `v + α·dv > 0`, damped to stay interior.
fn step_to_boundary(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut a = f64::INFINITY;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            a = a.min(-v[i] / dv[i]);
        }
    }
    (0.9995 * a).min(1.0)
}

pub(super) fn solve_diag_qp(
    m_quad: &DVector<f64>,
    cost: &DVector<f64>,
    eq: &DMatrix<f64>,
    eq_rhs: &DVector<f64>,
    ineq: &DMatrix<f64>,
    ineq_rhs: &DVector<f64>,
) -> Result<IpmSolution, String> {
    let n = cost.len();
    let m_a = eq.nrows();
    let m_c = ineq.nrows();
    let m_g = m_c + 2 * n;

    // G = [C; I; −I], h = [d; 1; 1].
    let mut g = DMatrix::zeros(m_g, n);
    g.view_mut((0, 0), (m_c, n)).copy_from(ineq);
    for j in 0..n {
        g[(m_c + j, j)] = 1.0;
        g[(m_c + n + j, j)] = -1.0;
    }
    let mut h = DVector::from_element(m_g, 1.0);
    h.rows_mut(0, m_c).copy_from(ineq_rhs);

    let mut x = DVector::zeros(n);
    let mut y = DVector::zeros(m_a);
    let mut w = DVector::from_fn(m_g, |i, _| h[i].abs().max(1.0));
    let mut z = DVector::from_element(m_g, 1.0);

    let c_scale = 1.0 + cost.amax();
    let b_scale = 1.0 + if m_a > 0 { eq_rhs.amax() } else { 0.0 };
    let h_scale = 1.0 + h.amax();

    for _ in 0..MAX_ITERS {
        // Residuals of the KKT system.
        let two_mx = DVector::from_fn(n, |i, _| 2.0 * m_quad[i] * x[i]);
        let r_d = &two_mx + cost + eq.transpose() * &y + g.transpose() * &z;
        let r_p = eq * &x - eq_rhs;
        let r_g = &g * &x + &w - &h;
        let mu = w.dot(&z) / m_g as f64;
        let objective = x.dot(&two_mx) / 2.0 + cost.dot(&x);

        if r_d.amax() / c_scale <= KKT_TOL
            && (m_a == 0 || r_p.amax() / b_scale <= KKT_TOL)
            && r_g.amax() / h_scale <= KKT_TOL
            && mu / (1.0 + objective.abs()) <= KKT_TOL
        {
            return Ok(finish(m_quad, cost, x, y, z, m_c));
        }

        // Condensed system: K = 2M + Gᵀ diag(z/w) G, shared by both steps.
        let zw = DVector::from_fn(m_g, |i, _| z[i] / w[i]);
        let mut k = DMatrix::zeros(n, n);
        for r in 0..m_c {
            let zwr = zw[r];
            for a in 0..n {
                let ga = ineq[(r, a)];
                if ga == 0.0 {
                    continue;
                }
                for b in 0..n {
                    k[(a, b)] += zwr * ga * ineq[(r, b)];
                }
            }
        }
        for j in 0..n {
            k[(j, j)] += 2.0 * m_quad[j] + zw[m_c + j] + zw[m_c + n + j];
        }
        let chol = cholesky_with_ridge(&mut k)?;
        let k_solve = |v: &DVector<f64>| chol.solve(v);

        // One KKT solve for a given complementarity target r_c.
        let solve_step = |r_c: &DVector<f64>| -> (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>) {
            // rhs_x = −r_d + Gᵀ W⁻¹ (r_c − Z r_g)
            let t = DVector::from_fn(m_g, |i, _| (r_c[i] - z[i] * r_g[i]) / w[i]);
            let rhs_x = -&r_d + g.transpose() * t;
            let (dx, dy);
            if m_a > 0 {
                let k_inv_rhs = k_solve(&rhs_x);
                let mut k_inv_at = DMatrix::zeros(n, m_a);
                for c in 0..m_a {
                    let col = eq.row(c).transpose();
                    k_inv_at.set_column(c, &k_solve(&col));
                }
                let schur = eq * &k_inv_at; // m_a × m_a
                let rhs_y = eq * &k_inv_rhs + &r_p;
                let dy_v = schur
                    .lu()
                    .solve(&rhs_y)
                    .unwrap_or_else(|| DVector::zeros(m_a));
                dx = k_solve(&(&rhs_x - eq.transpose() * &dy_v));
                dy = dy_v;
            } else {
                dx = k_solve(&rhs_x);
                dy = DVector::zeros(0);
            }
            let dw = -&r_g - &g * &dx;
            let dz = DVector::from_fn(m_g, |i, _| -(r_c[i] + z[i] * dw[i]) / w[i]);
            (dx, dy, dw, dz)
        };

        // Predictor: pure Newton toward complementarity zero.
        let r_c_aff = DVector::from_fn(m_g, |i, _| w[i] * z[i]);
        let (_, _, dw_a, dz_a) = solve_step(&r_c_aff);
        let ap = step_to_boundary(&w, &dw_a);
        let ad = step_to_boundary(&z, &dz_a);
        let mu_aff = (0..m_g).map(|i| (w[i] + ap * dw_a[i]) * (z[i] + ad * dz_a[i])).sum::<f64>()
            / m_g as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: recentre and cancel the second-order term.
        let r_c = DVector::from_fn(m_g, |i, _| w[i] * z[i] + dw_a[i] * dz_a[i] - sigma * mu);
        let (dx, dy, dw, dz) = solve_step(&r_c);
        let ap = step_to_boundary(&w, &dw);
        let ad = step_to_boundary(&z, &dz);
        x += ap * &dx;
        w += ap * &dw;
        y += ad * &dy;
        z += ad * &dz;
    }
    Err(format!("interior-point method did not reach {KKT_TOL:e} in {MAX_ITERS} iterations"))
}

/// Cholesky with an escalating diagonal ridge; the condensed matrix is
/// positive definite in exact arithmetic but late iterations are stiff.
fn cholesky_with_ridge(k: &mut DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>, String> {
    let n = k.nrows();
    let trace_avg = (0..n).map(|i| k[(i, i)]).sum::<f64>() / n.max(1) as f64;
    let mut ridge = 0.0;
    for _ in 0..6 {
        let mut attempt = k.clone();
        if ridge > 0.0 {
            for i in 0..n {
                attempt[(i, i)] += ridge;
            }
        }
        if let Some(c) = nalgebra::Cholesky::new(attempt) {
            return Ok(c);
        }
        ridge = if ridge == 0.0 { 1e-12 * (1.0 + trace_avg) } else { ridge * 100.0 };
    }
    Err("condensed KKT matrix lost positive definiteness".into())
}

fn finish(
    m_quad: &DVector<f64>,
    cost: &DVector<f64>,
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    m_c: usize,
) -> IpmSolution {
    let quad: f64 = (0..x.len()).map(|i| m_quad[i] * x[i] * x[i]).sum();
    let objective = quad + cost.dot(&x);
    let z_c = DVector::from_fn(m_c, |i, _| z[i].max(0.0));
    IpmSolution { x, objective, y, z: z_c }
}
