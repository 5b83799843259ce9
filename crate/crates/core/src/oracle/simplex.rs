//! Dense two-phase simplex for LPs whose structural variables live in
//! `[−1, 1]`.
//!
//! The working problem is `min cᵀx` s.t. `A_eq x = b`, `C x + w = d`,
//! `x ∈ [−1,1]ⁿ`, `w ≥ 0`, solved with an explicit basis inverse kept fresh
//! by product-form updates and periodic refactorization. Bland's rule is used
//! throughout — the problems this solver certifies are tiny, so cycling
//! protection is worth more than pivot-count heroics.

use nalgebra::{DMatrix, DVector};

pub(super) struct SimplexSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Row multipliers `π = c_Bᵀ B⁻¹` at optimality (equality rows first,
    /// then one per inequality row).
    pub pi: DVector<f64>,
}

pub(super) enum SimplexOutcome {
    Optimal(SimplexSolution),
    Infeasible,
    Unbounded,
}

/// Rebuild the basis inverse every this many product-form updates.
const REFACTOR_EVERY: usize = 50;

struct Tableau {
    /// Full column set: structurals, slacks, artificials; `m × n_total`.
    e: DMatrix<f64>,
    rhs: DVector<f64>,
    cost: DVector<f64>,
    lo: DVector<f64>,
    hi: DVector<f64>,
    /// Basic column per row.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// For nonbasic columns: currently resting at the upper bound?
    at_upper: Vec<bool>,
    binv: DMatrix<f64>,
    /// Current value of every column.
    vals: DVector<f64>,
    pivots_since_refactor: usize,
}

impl Tableau {
    fn m(&self) -> usize {
        self.rhs.len()
    }

    /// Recompute `binv` and the basic values from scratch.
    fn refactor(&mut self) -> Result<(), String> {
        let m = self.m();
        if m == 0 {
            self.recompute_basic_values();
            self.pivots_since_refactor = 0;
            return Ok(());
        }
        let mut b = DMatrix::zeros(m, m);
        for (r, &j) in self.basis.iter().enumerate() {
            b.set_column(r, &self.e.column(j));
        }
        self.binv = b
            .lu()
            .try_inverse()
            .ok_or_else(|| "basis matrix became singular during refactorization".to_string())?;
        self.recompute_basic_values();
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m();
        let mut residual = self.rhs.clone();
        for j in 0..self.e.ncols() {
            if !self.in_basis[j] {
                let v = if self.at_upper[j] { self.hi[j] } else { self.lo[j] };
                self.vals[j] = v;
                if v != 0.0 {
                    residual -= self.e.column(j) * v;
                }
            }
        }
        let basic_vals = &self.binv * residual;
        for r in 0..m {
            self.vals[self.basis[r]] = basic_vals[r];
        }
    }

    fn pi(&self) -> DVector<f64> {
        let m = self.m();
        let c_b = DVector::from_fn(m, |r, _| self.cost[self.basis[r]]);
        self.binv.transpose() * c_b
    }

    /// One Bland-rule iteration. `allow_entering` filters candidate columns.
    fn iterate(&mut self, allow_entering: &dyn Fn(usize) -> bool) -> Result<Step, String> {
        let m = self.m();
        let pi = self.pi();
        let ctol = 1e-9 * (1.0 + self.cost.amax());

        // Entering column: lowest index whose reduced cost improves.
        let mut entering = None;
        for j in 0..self.e.ncols() {
            if self.in_basis[j] || !allow_entering(j) || self.lo[j] == self.hi[j] {
                continue;
            }
            let z = self.cost[j] - pi.dot(&self.e.column(j));
            let improves =
                if self.at_upper[j] { z > ctol } else { z < -ctol };
            if improves {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { return Ok(Step::Optimal) };

        // Moving j off its bound by t·σ changes basic values by −t·σ·B⁻¹e_j.
        let sigma = if self.at_upper[j] { -1.0 } else { 1.0 };
        let d = &self.binv * self.e.column(j);
        let ptol = 1e-11;

        let width = self.hi[j] - self.lo[j]; // may be infinite
        let mut t_min = width;
        let mut leaving: Option<(usize, bool)> = None; // (row, hit upper bound)
        for r in 0..m {
            let delta = -sigma * d[r];
            if delta.abs() <= ptol {
                continue;
            }
            let bj = self.basis[r];
            let (t, hits_upper) = if delta < 0.0 {
                if self.lo[bj].is_infinite() {
                    continue;
                }
                ((self.vals[bj] - self.lo[bj]) / -delta, false)
            } else {
                if self.hi[bj].is_infinite() {
                    continue;
                }
                ((self.hi[bj] - self.vals[bj]) / delta, true)
            };
            let t = t.max(0.0);
            let better = t < t_min - 1e-12
                || (t < t_min + 1e-12
                    && leaving.map_or(false, |(lr, _)| bj < self.basis[lr]));
            if better {
                t_min = t;
                leaving = Some((r, hits_upper));
            }
        }

        if t_min.is_infinite() {
            return Ok(Step::Unbounded);
        }

        if let Some((r, hits_upper)) = leaving {
            // Pivot: j enters the basis, basis[r] leaves at the bound it hit.
            let piv = d[r];
            if piv.abs() <= 1e-12 {
                return Err("degenerate pivot element; basis update would be unstable".into());
            }
            for i in 0..m {
                let bj = self.basis[i];
                self.vals[bj] += t_min * (-sigma * d[i]);
            }
            let old = self.basis[r];
            self.vals[old] = if hits_upper { self.hi[old] } else { self.lo[old] };
            self.vals[j] = (if self.at_upper[j] { self.hi[j] } else { self.lo[j] }) + sigma * t_min;
            self.in_basis[old] = false;
            self.at_upper[old] = hits_upper;
            self.in_basis[j] = true;
            self.basis[r] = j;

            // Product-form update: row r is scaled first, then eliminated
            // from the others.
            let row_r = self.binv.row(r) / piv;
            self.binv.row_mut(r).copy_from(&row_r);
            for i in 0..m {
                if i != r && d[i] != 0.0 {
                    let scaled = &row_r * d[i];
                    let mut row_i = self.binv.row_mut(i);
                    row_i -= scaled;
                }
            }
            self.pivots_since_refactor += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
        } else {
            // Bound flip: j crosses its box without any basic hitting a bound.
            for i in 0..m {
                let bj = self.basis[i];
                self.vals[bj] += t_min * (-sigma * d[i]);
            }
            self.at_upper[j] = !self.at_upper[j];
            self.vals[j] = if self.at_upper[j] { self.hi[j] } else { self.lo[j] };
        }
        Ok(Step::Pivoted)
    }
}

enum Step {
    Pivoted,
    Optimal,
    Unbounded,
}

/// Solves `min costᵀx` over `eq·x = eq_rhs`, `ineq·x ≤ ineq_rhs`,
/// `x ∈ [−1, 1]ⁿ`.
pub(super) fn solve_bounded_lp(
    eq: &DMatrix<f64>,
    eq_rhs: &DVector<f64>,
    ineq: &DMatrix<f64>,
    ineq_rhs: &DVector<f64>,
    cost: &DVector<f64>,
) -> Result<SimplexOutcome, String> {
    let n = cost.len();
    let (m_a, m_c) = (eq.nrows(), ineq.nrows());
    let m = m_a + m_c;
    let n_struct = n + m_c; // structurals plus one slack per inequality
    let n_total = n_struct + m; // plus one artificial per row

    let mut e = DMatrix::zeros(m, n_total);
    e.view_mut((0, 0), (m_a, n)).copy_from(eq);
    e.view_mut((m_a, 0), (m_c, n)).copy_from(ineq);
    for i in 0..m_c {
        e[(m_a + i, n + i)] = 1.0;
    }
    let mut rhs = DVector::zeros(m);
    rhs.rows_mut(0, m_a).copy_from(eq_rhs);
    rhs.rows_mut(m_a, m_c).copy_from(ineq_rhs);

    let mut lo = DVector::from_element(n_total, 0.0);
    let mut hi = DVector::from_element(n_total, f64::INFINITY);
    for j in 0..n {
        lo[j] = -1.0;
        hi[j] = 1.0;
    }

    // Nonbasic start: x at −1, w at 0; artificials absorb the residual with a
    // ±1 column so they start nonnegative and basic.
    let mut vals = DVector::zeros(n_total);
    for j in 0..n {
        vals[j] = -1.0;
    }
    let mut residual = rhs.clone();
    for j in 0..n_struct {
        if vals[j] != 0.0 {
            residual -= e.column(j) * vals[j];
        }
    }
    let mut binv = DMatrix::zeros(m, m);
    for i in 0..m {
        let s = if residual[i] < 0.0 { -1.0 } else { 1.0 };
        e[(i, n_struct + i)] = s;
        binv[(i, i)] = s;
        vals[n_struct + i] = residual[i].abs();
    }

    let mut t = Tableau {
        e,
        rhs,
        cost: DVector::from_fn(n_total, |j, _| if j >= n_struct { 1.0 } else { 0.0 }),
        lo,
        hi,
        basis: (n_struct..n_total).collect(),
        in_basis: (0..n_total).map(|j| j >= n_struct).collect(),
        at_upper: vec![false; n_total],
        binv,
        vals,
        pivots_since_refactor: 0,
    };

    let iter_cap = 10_000 * (n_total + m).max(64);

    // Phase 1: drive the artificial sum to zero.
    let mut iters = 0;
    loop {
        match t.iterate(&|_| true)? {
            Step::Optimal => break,
            Step::Unbounded => {
                return Err("phase-1 objective is bounded below; ratio test failed".into())
            }
            Step::Pivoted => {}
        }
        iters += 1;
        if iters > iter_cap {
            return Err("phase 1 exceeded the iteration cap".into());
        }
    }
    let rhs_scale = if m > 0 { t.rhs.amax() } else { 0.0 };
    let artificial_sum: f64 = (n_struct..n_total).map(|j| t.vals[j]).sum();
    if artificial_sum > 1e-8 * (1.0 + rhs_scale) {
        return Ok(SimplexOutcome::Infeasible);
    }

    // Phase 2: real costs; artificials pinned to zero so they cannot return.
    for j in 0..n_total {
        t.cost[j] = if j < n { cost[j] } else { 0.0 };
        if j >= n_struct {
            t.lo[j] = 0.0;
            t.hi[j] = 0.0;
        }
    }
    t.refactor()?;

    let mut iters = 0;
    loop {
        match t.iterate(&|j| j < n_struct)? {
            Step::Optimal => break,
            Step::Unbounded => return Ok(SimplexOutcome::Unbounded),
            Step::Pivoted => {}
        }
        iters += 1;
        if iters > iter_cap {
            return Err("phase 2 exceeded the iteration cap".into());
        }
    }

    t.refactor()?; // fresh inverse for the multipliers
    let x = DVector::from_fn(n, |j, _| t.vals[j]);
    Ok(SimplexOutcome::Optimal(SimplexSolution {
        objective: cost.dot(&x),
        x,
        pi: t.pi(),
    }))
}
