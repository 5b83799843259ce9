//! Canonicalization: network dispatch as a minimization over the unit ∞-ball.
//!
//! Generator outputs are the decision vector. Each output is mapped to
//! `[−1, 1]` by `p = M_σ x̃ + m_μ` with `scale = (p_max−p_min)/2` and
//! `shift = (p_max+p_min)/2`; the power balance becomes one equality row,
//! the two-sided line-flow limits become stacked inequality rows
//! `[H_aG; −H_aG]` (scaled through the map), and the generator box becomes
//! `‖x̃‖_∞ ≤ 1`. Costs are kept in "canonical units" of $/h divided by the
//! MVA base, so conditioning stays near unity; multiplying an objective value
//! (plus [`CanonicalProblem::offset`]) by [`CanonicalProblem::cost_scale`]
//! restores $/h.
//!
//! Generators with `p_min == p_max` have no decision freedom: their injection
//! moves into the effective load, and their cost into the offset.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::case::PowerNetwork;
use crate::ptdf::PtdfMatrix;

/// Which objective family a canonical problem carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Linear costs only.
    Lp,
    /// Diagonal convex quadratic plus linear costs.
    Qp,
}

/// The affine map between generator outputs and the unit ∞-ball.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationMap {
    /// Half-widths `(upper−lower)/2`, all strictly positive.
    pub scale: DVector<f64>,
    /// Midpoints `(upper+lower)/2`.
    pub shift: DVector<f64>,
    /// Original per-unit output bounds of the free generators.
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl NormalizationMap {
    fn from_bounds(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        let scale = DVector::from_fn(lower.len(), |i, _| (upper[i] - lower[i]) / 2.0);
        let shift = DVector::from_fn(lower.len(), |i, _| lower[i] * 0.5 + upper[i] * 0.5);
        NormalizationMap { scale, shift, lower, upper }
    }

    /// Maps a ball point to outputs. Evaluated as the convex combination
    /// `lower·(1−x)/2 + upper·(1+x)/2`, which hits the bounds *bit-exactly*
    /// at `x = ∓1`, and is clamped so rounding can never leave the box.
    pub fn denormalize(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |i, _| {
            let p = self.lower[i] * (0.5 * (1.0 - x[i])) + self.upper[i] * (0.5 * (1.0 + x[i]));
            p.clamp(self.lower[i], self.upper[i])
        })
    }

    /// Maps outputs back to ball coordinates.
    pub fn normalize(&self, p: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(p.len(), |i, _| (p[i] - self.shift[i]) / self.scale[i])
    }
}

/// A dispatch problem rewritten over the unit ∞-ball.
///
/// Minimize `x̃ᵀ diag(m_quad) x̃ + costᵀx̃ (+ offset)` subject to
/// `eq_matrix·x̃ = eq_rhs`, `ineq_matrix·x̃ ≤ ineq_rhs`, `‖x̃‖_∞ ≤ 1`.
/// All values are in canonical cost units; see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalProblem {
    pub kind: ProblemKind,
    /// Diagonal of the quadratic cost matrix; all zeros for LP problems.
    pub m_quad: DVector<f64>,
    pub cost: DVector<f64>,
    /// One balance row: the free generators' scales.
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    /// `[W; −W]` stacked flow limits, `2 × (lines with finite limits)` rows.
    pub ineq_matrix: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    /// Constant cost term dropped during normalization (canonical units).
    pub offset: f64,
    /// Upper bound `t̄ = Σ_g m̂_g·max(p_min², p_max²)` on any in-bounds
    /// dispatch's quadratic cost (canonical units); `None` for LP.
    pub t_bound: Option<f64>,
    /// Multiplier restoring canonical cost units to $/h (the MVA base).
    pub cost_scale: f64,
    pub map: NormalizationMap,
    /// Indices into the source network's generator list, one per variable.
    pub free_gens: Vec<usize>,
    /// `(generator index, per-unit output)` of eliminated fixed units.
    pub fixed_gens: Vec<(usize, f64)>,
    /// Non-fatal observations (e.g. the balance row cannot be satisfied).
    pub warnings: Vec<String>,
}

impl CanonicalProblem {
    /// Number of decision variables.
    pub fn n_vars(&self) -> usize {
        self.cost.len()
    }
}

/// Errors from building or using a canonical problem.
#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("network has no generators")]
    NoGenerators,
    #[error("every generator is fixed (p_min == p_max); nothing to optimize")]
    AllGeneratorsFixed,
    #[error("generator {0} has a quadratic cost term; use the quadratic problem kind")]
    QuadraticCostInLinearModel(usize),
    #[error("PTDF was built for slack {ptdf} but the network's slack is {net}")]
    SlackMismatch { ptdf: usize, net: usize },
    #[error("PTDF shape {rows}×{cols} does not match the network ({lines} lines, {buses} buses)")]
    PtdfShape { rows: usize, cols: usize, lines: usize, buses: usize },
    #[error("point has {got} coordinates, problem has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {index} = {value} lies outside the unit ball")]
    OutsideBall { index: usize, value: f64 },
}

/// Rewrites a network dispatch problem in canonical form.
///
/// `kind` selects the objective family; requesting [`ProblemKind::Lp`] on a
/// network with quadratic cost terms is an error (dropping them would bound a
/// different problem). An unsatisfiable balance row only produces a warning:
/// the dual of an infeasible problem is unbounded, which the solver reports
/// as divergence rather than an error here.
pub fn canonicalize(
    net: &PowerNetwork,
    ptdf: &PtdfMatrix,
    kind: ProblemKind,
) -> Result<CanonicalProblem, CanonicalError> {
    let n_b = net.buses.len();
    let n_l = net.lines.len();
    if net.generators.is_empty() {
        return Err(CanonicalError::NoGenerators);
    }
    if ptdf.slack != net.slack_index() {
        return Err(CanonicalError::SlackMismatch { ptdf: ptdf.slack, net: net.slack_index() });
    }
    if ptdf.h_a.nrows() != n_l || ptdf.h_a.ncols() != n_b {
        return Err(CanonicalError::PtdfShape {
            rows: ptdf.h_a.nrows(),
            cols: ptdf.h_a.ncols(),
            lines: n_l,
            buses: n_b,
        });
    }
    if kind == ProblemKind::Lp {
        if let Some(g) = net.generators.iter().position(|g| g.cost_quad != 0.0) {
            return Err(CanonicalError::QuadraticCostInLinearModel(g));
        }
    }

    let base = net.base_mva;
    // Canonical-unit cost coefficients on per-unit outputs: dollars/h ÷ base.
    let c_lin = |g: &crate::case::Generator| g.cost_lin;
    let c_quad = |g: &crate::case::Generator| g.cost_quad * base;

    let mut free_gens = Vec::new();
    let mut fixed_gens = Vec::new();
    for (i, g) in net.generators.iter().enumerate() {
        if g.p_min == g.p_max {
            fixed_gens.push((i, g.p_min));
        } else {
            free_gens.push(i);
        }
    }
    if free_gens.is_empty() {
        return Err(CanonicalError::AllGeneratorsFixed);
    }
    let n = free_gens.len();

    // Effective bus load: raw load minus fixed injections.
    let mut load = DVector::from_fn(n_b, |i, _| net.buses[i].load);
    for &(gi, p) in &fixed_gens {
        load[net.generators[gi].bus] -= p;
    }

    let lower = DVector::from_fn(n, |j, _| net.generators[free_gens[j]].p_min);
    let upper = DVector::from_fn(n, |j, _| net.generators[free_gens[j]].p_max);
    let map = NormalizationMap::from_bounds(lower, upper);

    // Balance row: Σ p_g = Σ load ⇒ (scaleᵀ)x̃ = Σ load − Σ shift.
    let eq_matrix = DMatrix::from_fn(1, n, |_, j| map.scale[j]);
    let eq_rhs = DVector::from_element(1, load.sum() - map.shift.sum());

    // Flow rows for lines with finite limits: keep upper rows first and the
    // negated block second, so the two halves stay exact ± pairs.
    let limited: Vec<usize> = (0..n_l).filter(|&i| net.lines[i].flow_limit.is_finite()).collect();
    let phi = &ptdf.h_a * &load; // flows caused by load alone, negated below
    let h = limited.len();
    let mut ineq_matrix = DMatrix::zeros(2 * h, n);
    let mut ineq_rhs = DVector::zeros(2 * h);
    for (r, &li) in limited.iter().enumerate() {
        let lim = net.lines[li].flow_limit;
        let mut shift_flow = 0.0; // (H_aG m_μ)_li
        for (j, &gi) in free_gens.iter().enumerate() {
            let f = ptdf.h_a[(li, net.generators[gi].bus)];
            let w = f * map.scale[j];
            ineq_matrix[(r, j)] = w;
            ineq_matrix[(h + r, j)] = -w;
            shift_flow += f * map.shift[j];
        }
        ineq_rhs[r] = lim + phi[li] - shift_flow;
        ineq_rhs[h + r] = lim - phi[li] + shift_flow;
    }

    // Objective under p = scale·x̃ + shift, in canonical units.
    let mut cost = DVector::zeros(n);
    let mut m_quad = DVector::zeros(n);
    let mut offset = net.cost_offset / base;
    for (j, &gi) in free_gens.iter().enumerate() {
        let g = &net.generators[gi];
        let (cl, cq) = (c_lin(g), c_quad(g));
        cost[j] = map.scale[j] * (cl + 2.0 * cq * map.shift[j]);
        m_quad[j] = cq * map.scale[j] * map.scale[j];
        offset += cl * map.shift[j] + cq * map.shift[j] * map.shift[j];
    }
    for &(gi, p) in &fixed_gens {
        let g = &net.generators[gi];
        offset += c_lin(g) * p + c_quad(g) * p * p;
    }
    if kind == ProblemKind::Lp {
        m_quad.fill(0.0);
    }

    let t_bound = match kind {
        ProblemKind::Lp => None,
        ProblemKind::Qp => Some(
            net.generators
                .iter()
                .map(|g| c_quad(g) * (g.p_min * g.p_min).max(g.p_max * g.p_max))
                .sum(),
        ),
    };

    let mut warnings = Vec::new();
    let (need, lo_sum, hi_sum) = (load.sum(), map.lower.sum(), map.upper.sum());
    if need < lo_sum || need > hi_sum {
        warnings.push(format!(
            "balance row is unsatisfiable: effective load {need} per-unit vs dispatchable range [{lo_sum}, {hi_sum}]"
        ));
    }

    Ok(CanonicalProblem {
        kind,
        m_quad,
        cost,
        eq_matrix,
        eq_rhs,
        ineq_matrix,
        ineq_rhs,
        offset,
        t_bound,
        cost_scale: base,
        map,
        free_gens,
        fixed_gens,
        warnings,
    })
}

/// Maps a canonical point to the full per-unit dispatch (fixed units
/// included, at their fixed output).
///
/// Coordinates may stray at most `1e−9` outside the unit ball; anything
/// farther is an error.
pub fn denormalize_point(prob: &CanonicalProblem, x: &DVector<f64>) -> Result<DVector<f64>, CanonicalError> {
    if x.len() != prob.n_vars() {
        return Err(CanonicalError::DimensionMismatch { expected: prob.n_vars(), got: x.len() });
    }
    if let Some(i) = (0..x.len()).find(|&i| x[i].abs() > 1.0 + 1e-9) {
        return Err(CanonicalError::OutsideBall { index: i, value: x[i] });
    }
    let clamped = DVector::from_fn(x.len(), |i, _| x[i].clamp(-1.0, 1.0));
    let free = prob.map.denormalize(&clamped);
    let n_g = prob.free_gens.len() + prob.fixed_gens.len();
    let mut p = DVector::zeros(n_g);
    for (j, &gi) in prob.free_gens.iter().enumerate() {
        p[gi] = free[j];
    }
    for &(gi, v) in &prob.fixed_gens {
        p[gi] = v;
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// JSON dump
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CanonicalDto<'a> {
    kind: ProblemKind,
    n_vars: usize,
    cost: &'a [f64],
    m_quad: &'a [f64],
    /// Row-major: one inner array per row.
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: &'a [f64],
    ineq_matrix: Vec<Vec<f64>>,
    ineq_rhs: &'a [f64],
    offset: f64,
    t_bound: Option<f64>,
    cost_scale: f64,
    scale: &'a [f64],
    shift: &'a [f64],
}

/// Serializes the problem as JSON with row-major matrices, for comparison
/// against other implementations. Field names are part of the interface:
/// `kind`, `n_vars`, `cost`, `m_quad`, `eq_matrix`, `eq_rhs`, `ineq_matrix`,
/// `ineq_rhs`, `offset`, `t_bound`, `cost_scale`, `scale`, `shift`.
pub fn to_json_string(prob: &CanonicalProblem) -> String {
    let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    };
    let dto = CanonicalDto {
        kind: prob.kind,
        n_vars: prob.n_vars(),
        cost: prob.cost.as_slice(),
        m_quad: prob.m_quad.as_slice(),
        eq_matrix: rows(&prob.eq_matrix),
        eq_rhs: prob.eq_rhs.as_slice(),
        ineq_matrix: rows(&prob.ineq_matrix),
        ineq_rhs: prob.ineq_rhs.as_slice(),
        offset: prob.offset,
        t_bound: prob.t_bound,
        cost_scale: prob.cost_scale,
        scale: prob.map.scale.as_slice(),
        shift: prob.map.shift.as_slice(),
    };
    serde_json::to_string_pretty(&dto).expect("plain data serializes")
}
