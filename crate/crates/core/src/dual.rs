//! Closed-form Lagrangian dual objectives and supergradients.
//!
//! Dualizing the equality and inequality rows of a canonical problem while
//! keeping the unit ∞-ball explicit gives a concave, piecewise-smooth dual
//! with a *closed-form* value: the inner minimization over the ball separates
//! per coordinate. With `r = c + Aᵀλ + Cᵀμ`,
//!
//! - **linear costs**: `g(λ, μ) = −‖r‖₁ − λᵀb − μᵀd`,
//! - **quadratic costs**: the quadratic is written variationally as
//!   `xᵀMx = max_s (√M s)ᵀx − sᵀs/4`, giving the jointly concave
//!   `g(λ, μ, s) = −‖r − √M s‖₁ − sᵀs/4 − λᵀb − μᵀd` whose maximum over `s`
//!   is exactly the quadratic dual — nothing is lost by the reformulation.
//!
//! Every value of `g` at `μ ≥ 0` is a certified lower bound on the primal
//! optimum (weak duality); maximizing `g` by projected supergradient ascent
//! is the whole point of this crate. Evaluation cost is two passes over the
//! inequality matrix; [`DualWorkspace`] recognizes the `[W; −W]` row
//! structure that canonicalization produces and streams only `W`, halving
//! memory traffic, and it evaluates without allocating so the ascent loop
//! stays tight.

use nalgebra::DVector;
use thiserror::Error;

use crate::canonical::{CanonicalProblem, ProblemKind};

/// A dual point: multipliers on the equality rows (`lambda`, free), the
/// inequality rows (`mu`, must be ≥ 0 for a valid bound), and the
/// variational coordinates (`s`, quadratic problems only, empty otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct DualIterate {
    pub lambda: DVector<f64>,
    pub mu: DVector<f64>,
    pub s: DVector<f64>,
}

impl DualIterate {
    /// The all-zeros starting point, shaped for `prob`.
    pub fn zeros(prob: &CanonicalProblem) -> Self {
        DualIterate {
            lambda: DVector::zeros(prob.eq_matrix.nrows()),
            mu: DVector::zeros(prob.ineq_matrix.nrows()),
            s: match prob.kind {
                ProblemKind::Lp => DVector::zeros(0),
                ProblemKind::Qp => DVector::zeros(prob.n_vars()),
            },
        }
    }

    /// Clamps `mu` into the nonnegative orthant (the dual feasible set).
    pub fn project(&mut self) {
        for v in self.mu.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

/// Value and supergradient of the dual objective at an iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEvaluation {
    /// `g` in canonical cost units (offset not included).
    pub objective: f64,
    pub grad_lambda: DVector<f64>,
    pub grad_mu: DVector<f64>,
    pub grad_s: DVector<f64>,
}

impl DualEvaluation {
    /// Preallocated output buffer shaped for `prob`.
    pub fn zeros(prob: &CanonicalProblem) -> Self {
        DualEvaluation {
            objective: 0.0,
            grad_lambda: DVector::zeros(prob.eq_matrix.nrows()),
            grad_mu: DVector::zeros(prob.ineq_matrix.nrows()),
            grad_s: match prob.kind {
                ProblemKind::Lp => DVector::zeros(0),
                ProblemKind::Qp => DVector::zeros(prob.n_vars()),
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum DualError {
    #[error("mu[{index}] = {value} is negative; project before evaluating")]
    NegativeMu { index: usize, value: f64 },
    #[error("iterate block {block} has length {got}, problem expects {expected}")]
    Dimension { block: &'static str, expected: usize, got: usize },
}

// ---------------------------------------------------------------------------
// Hot kernels
// ---------------------------------------------------------------------------

/// Four-accumulator dot product; the compiler vectorizes the independent
/// partial sums, which a single serial accumulator forbids.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in (&mut ca).zip(&mut cb) {
        s0 += x[0] * y[0];
        s1 += x[1] * y[1];
        s2 += x[2] * y[2];
        s3 += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// `y += a·x`.
#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Workspace
// ---------------------------------------------------------------------------

/// How the inequality matrix is streamed during evaluation.
enum IneqLayout {
    /// `C = [W; −W]` detected bitwise: only `W` (column-major, `h × n`) is
    /// stored and each evaluation reads it twice instead of reading `C`
    /// twice — half the memory traffic, identical results up to rounding.
    Paired { w: Vec<f64>, h: usize },
    /// Arbitrary rows: a column-major copy of the full matrix.
    General { c: Vec<f64>, m: usize },
}

/// Reusable evaluation state for one canonical problem.
///
/// Construction copies the problem data into cache-friendly layouts and
/// sizes every scratch buffer; [`DualWorkspace::eval_into`] then performs no
/// allocation at all, which is what keeps per-iteration cost at two sweeps
/// of memory bandwidth.
pub struct DualWorkspace {
    kind: ProblemKind,
    n: usize,
    m_a: usize,
    m_c: usize,
    layout: IneqLayout,
    /// Aᵀ, column-major `n × m_a` (each equality row contiguous).
    at: Vec<f64>,
    b: DVector<f64>,
    c_cost: DVector<f64>,
    d: DVector<f64>,
    sqrt_m: DVector<f64>,
    // Scratch, reused across evaluations.
    r: DVector<f64>,
    x_star: DVector<f64>,
    mu_diff: DVector<f64>,
    row_acc: DVector<f64>,
}

impl DualWorkspace {
    pub fn new(prob: &CanonicalProblem) -> Self {
        let n = prob.n_vars();
        let m_a = prob.eq_matrix.nrows();
        let m_c = prob.ineq_matrix.nrows();

        let layout = match detect_pairs(prob) {
            Some(h) => {
                let mut w = vec![0.0; h * n];
                for j in 0..n {
                    for i in 0..h {
                        w[j * h + i] = prob.ineq_matrix[(i, j)];
                    }
                }
                IneqLayout::Paired { w, h }
            }
            None => {
                let mut c = vec![0.0; m_c * n];
                for j in 0..n {
                    for i in 0..m_c {
                        c[j * m_c + i] = prob.ineq_matrix[(i, j)];
                    }
                }
                IneqLayout::General { c, m: m_c }
            }
        };

        let mut at = vec![0.0; n * m_a];
        for i in 0..m_a {
            for j in 0..n {
                at[i * n + j] = prob.eq_matrix[(i, j)];
            }
        }

        DualWorkspace {
            kind: prob.kind,
            n,
            m_a,
            m_c,
            layout,
            at,
            b: prob.eq_rhs.clone(),
            c_cost: prob.cost.clone(),
            d: prob.ineq_rhs.clone(),
            sqrt_m: DVector::from_fn(n, |i, _| prob.m_quad[i].sqrt()),
            r: DVector::zeros(n),
            x_star: DVector::zeros(n),
            mu_diff: DVector::zeros(m_c),
            row_acc: DVector::zeros(m_c),
        }
    }

    /// Test hook: force the general (unpaired) streaming path.
    #[cfg(test)]
    fn force_general(prob: &CanonicalProblem) -> Self {
        let mut ws = Self::new(prob);
        let m_c = prob.ineq_matrix.nrows();
        let n = prob.n_vars();
        let mut c = vec![0.0; m_c * n];
        for j in 0..n {
            for i in 0..m_c {
                c[j * m_c + i] = prob.ineq_matrix[(i, j)];
            }
        }
        ws.layout = IneqLayout::General { c, m: m_c };
        ws
    }

    fn check_shapes(&self, it: &DualIterate) -> Result<(), DualError> {
        let want_s = match self.kind {
            ProblemKind::Lp => 0,
            ProblemKind::Qp => self.n,
        };
        for (block, expected, got) in [
            ("lambda", self.m_a, it.lambda.len()),
            ("mu", self.m_c, it.mu.len()),
            ("s", want_s, it.s.len()),
        ] {
            if expected != got {
                return Err(DualError::Dimension { block, expected, got });
            }
        }
        if let Some(index) = (0..it.mu.len()).find(|&i| it.mu[i] < 0.0) {
            return Err(DualError::NegativeMu { index, value: it.mu[index] });
        }
        Ok(())
    }

    /// Evaluates the dual objective and a supergradient at `it`, writing into
    /// `out`. Performs no allocation.
    pub fn eval_into(&mut self, it: &DualIterate, out: &mut DualEvaluation) -> Result<(), DualError> {
        self.check_shapes(it)?;
        // Reshape only a mismatched buffer: a correctly shaped `out` (the
        // steady state of the ascent loop) must trigger no allocation, and
        // every entry is overwritten below so no zero-fill is needed.
        let ensure_len = |v: &mut DVector<f64>, len: usize| {
            if v.len() != len {
                *v = DVector::zeros(len);
            }
        };
        ensure_len(&mut out.grad_lambda, self.m_a);
        ensure_len(&mut out.grad_mu, self.m_c);
        ensure_len(&mut out.grad_s, it.s.len());

        let n = self.n;
        let r = self.r.as_mut_slice();
        r.copy_from_slice(self.c_cost.as_slice());

        // r += Aᵀλ (rows of A are contiguous in `at`).
        for i in 0..self.m_a {
            axpy(r, it.lambda[i], &self.at[i * n..(i + 1) * n]);
        }

        // r += Cᵀμ — first sweep over the inequality matrix.
        match &self.layout {
            IneqLayout::Paired { w, h } => {
                let diff = &mut self.mu_diff.as_mut_slice()[..*h];
                for i in 0..*h {
                    diff[i] = it.mu[i] - it.mu[h + i];
                }
                for j in 0..n {
                    r[j] += dot(&w[j * h..(j + 1) * h], diff);
                }
            }
            IneqLayout::General { c, m } => {
                let mu = it.mu.as_slice();
                for j in 0..n {
                    r[j] += dot(&c[j * m..(j + 1) * m], mu);
                }
            }
        }

        // Quadratic problems: r −= √M ∘ s.
        if self.kind == ProblemKind::Qp {
            for j in 0..n {
                r[j] -= self.sqrt_m[j] * it.s[j];
            }
        }

        // Inner minimizer over the ball and the ‖r‖₁ term.
        let mut l1 = 0.0;
        let xs = self.x_star.as_mut_slice();
        for j in 0..n {
            l1 += r[j].abs();
            xs[j] = -sign(r[j]);
        }

        let mut objective = -l1 - dot(it.lambda.as_slice(), self.b.as_slice())
            - dot(it.mu.as_slice(), self.d.as_slice());
        if self.kind == ProblemKind::Qp {
            objective -= 0.25 * dot(it.s.as_slice(), it.s.as_slice());
        }
        out.objective = objective;

        // ∇λ = A x* − b evaluated at the inner minimizer x* = −sign(r).
        for i in 0..self.m_a {
            out.grad_lambda[i] = dot(&self.at[i * n..(i + 1) * n], xs) - self.b[i];
        }

        // ∇μ = C x* − d — second sweep.
        match &self.layout {
            IneqLayout::Paired { w, h } => {
                let acc = &mut self.row_acc.as_mut_slice()[..*h];
                acc.fill(0.0);
                for j in 0..n {
                    if xs[j] != 0.0 {
                        axpy(acc, xs[j], &w[j * h..(j + 1) * h]);
                    }
                }
                for i in 0..*h {
                    out.grad_mu[i] = acc[i] - self.d[i];
                    out.grad_mu[h + i] = -acc[i] - self.d[h + i];
                }
            }
            IneqLayout::General { c, m } => {
                let acc = self.row_acc.as_mut_slice();
                acc.fill(0.0);
                for j in 0..n {
                    if xs[j] != 0.0 {
                        axpy(acc, xs[j], &c[j * m..(j + 1) * m]);
                    }
                }
                for i in 0..*m {
                    out.grad_mu[i] = acc[i] - self.d[i];
                }
            }
        }

        // ∇s = √M ∘ sign(r) − s/2.
        if self.kind == ProblemKind::Qp {
            for j in 0..n {
                out.grad_s[j] = -self.sqrt_m[j] * xs[j] - 0.5 * it.s[j];
            }
        }
        Ok(())
    }

    /// Whether the `[W; −W]` structure was detected at construction.
    pub fn uses_paired_layout(&self) -> bool {
        matches!(self.layout, IneqLayout::Paired { .. })
    }
}

/// Returns `h` if the inequality block is `[W; −W]` with `W` of height `h`,
/// comparing *bitwise* — canonicalization produces the lower block by exact
/// negation, so this never misfires on real problems.
fn detect_pairs(prob: &CanonicalProblem) -> Option<usize> {
    let m = prob.ineq_matrix.nrows();
    if m == 0 || m % 2 != 0 {
        return (m == 0).then_some(0);
    }
    let h = m / 2;
    for j in 0..prob.n_vars() {
        for i in 0..h {
            let upper = prob.ineq_matrix[(i, j)];
            let lower = prob.ineq_matrix[(h + i, j)];
            if lower.to_bits() != (-upper).to_bits() {
                return None;
            }
        }
    }
    Some(h)
}

/// One-shot evaluation; builds a fresh workspace. Use [`DualWorkspace`]
/// directly when evaluating repeatedly.
pub fn eval_dual(prob: &CanonicalProblem, it: &DualIterate) -> Result<DualEvaluation, DualError> {
    let mut ws = DualWorkspace::new(prob);
    let mut out = DualEvaluation::zeros(prob);
    ws.eval_into(it, &mut out)?;
    Ok(out)
}

/// The exact maximizer of `g(λ, μ, ·)`: per coordinate, with
/// `ρ = c + Aᵀλ + Cᵀμ`, the optimum is `ρᵢ/√mᵢ` while `|ρᵢ| ≤ 2mᵢ` and
/// `2√mᵢ·sign(ρᵢ)` beyond (zero where `mᵢ = 0`). At this `s` the variational
/// dual equals the plain quadratic dual at `(λ, μ)`.
pub fn optimal_s_for(prob: &CanonicalProblem, lambda: &DVector<f64>, mu: &DVector<f64>) -> DVector<f64> {
    let rho = &prob.cost + prob.eq_matrix.transpose() * lambda + prob.ineq_matrix.transpose() * mu;
    DVector::from_fn(prob.n_vars(), |i, _| {
        let m = prob.m_quad[i];
        if m <= 0.0 {
            0.0
        } else {
            let sm = m.sqrt();
            if rho[i].abs() <= 2.0 * m {
                rho[i] / sm
            } else {
                2.0 * sm * sign(rho[i])
            }
        }
    })
}

/// Converts a canonical dual value into a $/h lower bound on the original
/// network's dispatch cost.
pub fn bound_in_dollars(prob: &CanonicalProblem, canonical_objective: f64) -> f64 {
    (canonical_objective + prob.offset) * prob.cost_scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::case::parse_case;
    use crate::fixtures;
    use crate::oracle::{solve_reference, solve_with_simplex};
    use crate::ptdf::build_ptdf;

    fn canon(text: &str, kind: ProblemKind) -> CanonicalProblem {
        let net = parse_case(text).unwrap();
        let ptdf = build_ptdf(&net).unwrap();
        canonicalize(&net, &ptdf, kind).unwrap()
    }

    /// Deterministic pseudo-random stream (xorshift64*).
    struct Rng(u64);
    impl Rng {
        fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
        /// Uniform in [lo, hi).
        fn range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next_f64()
        }
    }

    fn random_iterate(prob: &CanonicalProblem, rng: &mut Rng) -> DualIterate {
        let mut it = DualIterate::zeros(prob);
        for v in it.lambda.iter_mut() {
            *v = rng.range(-5.0, 5.0);
        }
        for v in it.mu.iter_mut() {
            *v = rng.range(0.1, 5.0);
        }
        for v in it.s.iter_mut() {
            *v = rng.range(-3.0, 3.0);
        }
        it
    }

    #[test]
    fn zero_iterate_value_is_minus_l1_of_cost() {
        for (text, kind) in [(fixtures::CASE5, ProblemKind::Lp), (fixtures::CASE5Q, ProblemKind::Qp)] {
            let prob = canon(text, kind);
            let eval = eval_dual(&prob, &DualIterate::zeros(&prob)).unwrap();
            let l1: f64 = prob.cost.iter().map(|c| c.abs()).sum();
            assert_eq!(eval.objective, -l1);
        }
    }

    #[test]
    fn every_projected_iterate_gives_a_lower_bound() {
        let mut rng = Rng(0x9E3779B97F4A7C15);
        for (text, kind) in [
            (fixtures::CASE5, ProblemKind::Lp),
            (fixtures::CASE5Q, ProblemKind::Qp),
            (fixtures::CASE3Q, ProblemKind::Qp),
        ] {
            let prob = canon(text, kind);
            let optimum = solve_reference(&prob).unwrap().objective;
            for _ in 0..200 {
                let it = random_iterate(&prob, &mut rng);
                let eval = eval_dual(&prob, &it).unwrap();
                assert!(
                    eval.objective <= optimum + 1e-9 * optimum.abs().max(1.0),
                    "dual value {} exceeds optimum {optimum}",
                    eval.objective
                );
            }
        }
    }

    #[test]
    fn strong_duality_at_reference_multipliers_lp() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let sol = solve_with_simplex(&prob).unwrap();
        let it = DualIterate { lambda: sol.eq_duals.clone(), mu: sol.ineq_duals.clone(), s: DVector::zeros(0) };
        let eval = eval_dual(&prob, &it).unwrap();
        assert!(
            (eval.objective - sol.objective).abs() <= 1e-6 * sol.objective.abs(),
            "dual {} vs primal {}",
            eval.objective,
            sol.objective
        );
    }

    #[test]
    fn strong_duality_at_reference_multipliers_qp() {
        for text in [fixtures::CASE5Q, fixtures::CASE3Q] {
            let prob = canon(text, ProblemKind::Qp);
            let sol = solve_reference(&prob).unwrap();
            let s = optimal_s_for(&prob, &sol.eq_duals, &sol.ineq_duals);
            let it = DualIterate { lambda: sol.eq_duals.clone(), mu: sol.ineq_duals.clone(), s };
            let eval = eval_dual(&prob, &it).unwrap();
            assert!(
                (eval.objective - sol.objective).abs() <= 1e-6 * sol.objective.abs(),
                "dual {} vs primal {}",
                eval.objective,
                sol.objective
            );
        }
    }

    #[test]
    fn optimal_s_maximizes_over_s() {
        let prob = canon(fixtures::CASE5Q, ProblemKind::Qp);
        let mut rng = Rng(42);
        for _ in 0..50 {
            let base = random_iterate(&prob, &mut rng);
            let s_star = optimal_s_for(&prob, &base.lambda, &base.mu);
            let at_star = eval_dual(&prob, &DualIterate { s: s_star.clone(), ..base.clone() })
                .unwrap()
                .objective;
            for _ in 0..5 {
                let mut other = base.clone();
                for v in other.s.iter_mut() {
                    *v = rng.range(-4.0, 4.0);
                }
                let val = eval_dual(&prob, &other).unwrap().objective;
                assert!(val <= at_star + 1e-10 * at_star.abs().max(1.0));
            }
            // And ∇s vanishes there (smooth in s wherever r has no zeros).
            let eval = eval_dual(&prob, &DualIterate { s: s_star, ..base }).unwrap();
            assert!(eval.grad_s.amax() <= 1e-9);
        }
    }

    #[test]
    fn supergradient_inequality_holds() {
        // Concavity: g(y') ≤ g(y) + ⟨∇g(y), y' − y⟩ for all pairs.
        let mut rng = Rng(7);
        for (text, kind) in [(fixtures::CASE5, ProblemKind::Lp), (fixtures::CASE3Q, ProblemKind::Qp)] {
            let prob = canon(text, kind);
            for _ in 0..100 {
                let a = random_iterate(&prob, &mut rng);
                let b = random_iterate(&prob, &mut rng);
                let ea = eval_dual(&prob, &a).unwrap();
                let eb = eval_dual(&prob, &b).unwrap();
                let linear = ea.objective
                    + ea.grad_lambda.dot(&(&b.lambda - &a.lambda))
                    + ea.grad_mu.dot(&(&b.mu - &a.mu))
                    + ea.grad_s.dot(&(&b.s - &a.s));
                assert!(
                    eb.objective <= linear + 1e-9 * linear.abs().max(1.0),
                    "supergradient inequality violated: {} > {linear}",
                    eb.objective
                );
            }
        }
    }

    #[test]
    fn finite_differences_match_gradients() {
        let mut rng = Rng(1234);
        let h = 1e-6;
        for (text, kind) in [(fixtures::CASE5, ProblemKind::Lp), (fixtures::CASE5Q, ProblemKind::Qp)] {
            let prob = canon(text, kind);
            let mut checked = 0;
            'outer: while checked < 10 {
                let it = random_iterate(&prob, &mut rng);
                // Skip kink neighborhoods: central differences straddle the
                // nondifferentiable set where some r_i crosses zero.
                let mut ws = DualWorkspace::new(&prob);
                let mut eval = DualEvaluation::zeros(&prob);
                ws.eval_into(&it, &mut eval).unwrap();
                {
                    let rho = &prob.cost
                        + prob.eq_matrix.transpose() * &it.lambda
                        + prob.ineq_matrix.transpose() * &it.mu;
                    let s_term = DVector::from_fn(prob.n_vars(), |i, _| {
                        prob.m_quad[i].sqrt() * it.s.get(i).copied().unwrap_or(0.0)
                    });
                    if (rho - s_term).iter().any(|v| v.abs() < 1e-4) {
                        continue 'outer;
                    }
                }
                checked += 1;
                let grads: Vec<f64> = eval
                    .grad_lambda
                    .iter()
                    .chain(eval.grad_mu.iter())
                    .chain(eval.grad_s.iter())
                    .copied()
                    .collect();
                let dims = grads.len();
                for k in 0..dims {
                    let mut plus = it.clone();
                    let mut minus = it.clone();
                    let bump = |t: &mut DualIterate, delta: f64| {
                        let (la, mc) = (t.lambda.len(), t.mu.len());
                        if k < la {
                            t.lambda[k] += delta;
                        } else if k < la + mc {
                            t.mu[k - la] += delta;
                        } else {
                            t.s[k - la - mc] += delta;
                        }
                    };
                    bump(&mut plus, h);
                    bump(&mut minus, -h);
                    let fp = eval_dual(&prob, &plus).unwrap().objective;
                    let fm = eval_dual(&prob, &minus).unwrap().objective;
                    let fd = (fp - fm) / (2.0 * h);
                    assert!(
                        (fd - grads[k]).abs() <= 1e-5 * grads[k].abs().max(1.0),
                        "coordinate {k}: fd {fd} vs analytic {}",
                        grads[k]
                    );
                }
            }
        }
    }

    #[test]
    fn paired_and_general_paths_agree() {
        let mut rng = Rng(99);
        for (text, kind) in [(fixtures::CASE5, ProblemKind::Lp), (fixtures::CASE5Q, ProblemKind::Qp)] {
            let prob = canon(text, kind);
            let mut fast = DualWorkspace::new(&prob);
            let mut slow = DualWorkspace::force_general(&prob);
            assert!(fast.uses_paired_layout());
            assert!(!slow.uses_paired_layout());
            let mut ea = DualEvaluation::zeros(&prob);
            let mut eb = DualEvaluation::zeros(&prob);
            for _ in 0..50 {
                let it = random_iterate(&prob, &mut rng);
                fast.eval_into(&it, &mut ea).unwrap();
                slow.eval_into(&it, &mut eb).unwrap();
                let scale = ea.objective.abs().max(1.0);
                assert!((ea.objective - eb.objective).abs() <= 1e-12 * scale);
                assert!((&ea.grad_mu - &eb.grad_mu).amax() <= 1e-12 * scale);
                assert!((&ea.grad_lambda - &eb.grad_lambda).amax() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn negative_mu_is_rejected() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let mut it = DualIterate::zeros(&prob);
        it.mu[3] = -0.5;
        match eval_dual(&prob, &it) {
            Err(DualError::NegativeMu { index: 3, .. }) => {}
            other => panic!("expected NegativeMu, got {other:?}"),
        }
        it.project();
        assert_eq!(it.mu[3], 0.0);
        assert!(eval_dual(&prob, &it).is_ok());
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let it = DualIterate {
            lambda: DVector::zeros(1),
            mu: DVector::zeros(3), // wrong: needs 12
            s: DVector::zeros(0),
        };
        match eval_dual(&prob, &it) {
            Err(DualError::Dimension { block: "mu", expected: 12, got: 3 }) => {}
            other => panic!("expected Dimension, got {other:?}"),
        }
    }

    #[test]
    fn bound_conversion_matches_manual_arithmetic() {
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let g = -12.5;
        assert_eq!(bound_in_dollars(&prob, g), (g + prob.offset) * prob.cost_scale);
    }

    #[test]
    fn lp_dual_at_optimum_needs_no_s() {
        // The variational coordinates only exist for quadratic problems; an
        // LP iterate carrying a nonempty s is a shape error, not a silent
        // extension.
        let prob = canon(fixtures::CASE5, ProblemKind::Lp);
        let it = DualIterate {
            lambda: DVector::zeros(1),
            mu: DVector::zeros(12),
            s: DVector::zeros(3),
        };
        assert!(matches!(eval_dual(&prob, &it), Err(DualError::Dimension { block: "s", .. })));
    }
}
