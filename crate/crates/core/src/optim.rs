//! Projected supergradient ascent on the dual objective.
//!
//! All four update rules walk the concatenated multiplier vector
//! `(λ, μ[, s])` uphill along supergradients from [`crate::dual`], then
//! project `μ` back onto the nonnegative orthant. Because every projected
//! iterate's objective is a certified lower bound, the running maximum
//! ([`TraceRecord::best_bound`]) is monotone and always safe to report, no
//! matter how wild the raw iterates are.
//!
//! One dual evaluation happens per iteration: the evaluation that scores an
//! iterate also supplies the supergradient for the next step.

use std::time::Instant;

use nalgebra::DVector;
use thiserror::Error;

use crate::canonical::CanonicalProblem;
use crate::dual::{DualError, DualEvaluation, DualIterate, DualWorkspace};
use crate::fmt::g17;

/// Ascent update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Adam with bias correction.
    Adam,
    /// AdaGrad: per-coordinate step `α/(√Σg² + ε)`.
    AdaGrad,
    /// Heavy-ball momentum in the form used by the reference hyperparameter
    /// sets: `v ← ρv + αg; θ ← θ + v + αg` (the fresh gradient is applied
    /// both inside the velocity and again on top).
    Gdm,
    /// Textbook heavy ball: `v ← ρv + αg; θ ← θ + v`.
    GdmClassic,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Adam => "adam",
            Variant::AdaGrad => "adagrad",
            Variant::Gdm => "gdm",
            Variant::GdmClassic => "gdm-classic",
        }
    }
}

/// Geometric step-size decay: the base step is multiplied by `factor` once
/// every `every_n` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub factor: f64,
    pub every_n: usize,
}

/// Hyperparameters for one ascent run. Fields irrelevant to the chosen
/// [`Variant`] are ignored by the solver (the command-line front end is
/// stricter and rejects them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Base step size.
    pub alpha: f64,
    /// Momentum coefficient ρ (GDM variants).
    pub momentum: f64,
    /// First-moment coefficient β₁ (Adam).
    pub beta1: f64,
    /// Second-moment coefficient β₂ (Adam).
    pub beta2: f64,
    /// Denominator guard for the adaptive variants.
    pub epsilon: f64,
    pub decay: Option<Decay>,
    /// Stop when the objective moves less than this between iterations.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha: 1.0,
            momentum: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            decay: None,
            tol: 1e-6,
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dual(#[from] DualError),
}

impl OptimizerConfig {
    fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::Config(msg));
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive and finite, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1), got {v}"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad(format!("tol must be nonnegative, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if let Some(d) = self.decay {
            if !(d.factor > 0.0 && d.factor <= 1.0) {
                return bad(format!("decay factor must lie in (0, 1], got {}", d.factor));
            }
            if d.every_n == 0 {
                return bad("decay interval must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Objective change dropped below `tol`.
    Converged,
    /// Iteration budget exhausted.
    MaxIters,
    /// Objective left the finite range (an unbounded dual — usually an
    /// infeasible primal — or a step size far too large).
    Diverged,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max-iters",
            SolveStatus::Diverged => "diverged",
        }
    }
}

/// One trace row. `iter` 0 is the starting point before any update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Dual objective at this iterate (canonical units).
    pub objective: f64,
    /// Running maximum of `objective` — the certified bound so far.
    pub best_bound: f64,
    /// Wall-clock seconds since the ascent loop started.
    pub elapsed_s: f64,
}

/// Objective history of a run.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    /// CSV with header `iter,objective,best_bound,elapsed_s`; floats are
    /// rendered with 17 significant digits so parsing the file recovers the
    /// exact binary values.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str("iter,objective,best_bound,elapsed_s\n");
        for r in &self.records {
            out.push_str(&r.iter.to_string());
            out.push(',');
            out.push_str(&g17(r.objective));
            out.push(',');
            out.push_str(&g17(r.best_bound));
            out.push(',');
            out.push_str(&g17(r.elapsed_s));
            out.push('\n');
        }
        out
    }
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Update steps performed (trace rows minus the starting row, when no
    /// divergence truncated the trace).
    pub iterations: usize,
    /// Best dual objective seen, canonical units; convert with
    /// [`crate::dual::bound_in_dollars`].
    pub best_bound: f64,
    pub final_iterate: DualIterate,
    pub trace: ConvergenceTrace,
    /// Time spent inside the ascent loop.
    pub wall_seconds: f64,
}

/// Snapshot handed to the observer after each completed iteration.
pub struct StepEvent<'a> {
    /// 1-based index of the just-finished iteration.
    pub iter: usize,
    pub objective: f64,
    pub best_bound: f64,
    /// Step size actually used this iteration (base α times accrued decay).
    pub effective_alpha: f64,
    pub iterate: &'a DualIterate,
    pub evaluation: &'a DualEvaluation,
}

/// Per-variant optimizer state, shaped like the iterate blocks.
struct Moments {
    m1: DualIterate,
    m2: DualIterate,
    t: u64,
}

impl Moments {
    fn zeros(prob: &CanonicalProblem) -> Self {
        Moments { m1: DualIterate::zeros(prob), m2: DualIterate::zeros(prob), t: 0 }
    }
}

#[inline]
fn update_block(
    variant: Variant,
    cfg: &OptimizerConfig,
    alpha: f64,
    t: u64,
    theta: &mut DVector<f64>,
    grad: &DVector<f64>,
    m1: &mut DVector<f64>,
    m2: &mut DVector<f64>,
) {
    match variant {
        Variant::Adam => {
            let (b1, b2) = (cfg.beta1, cfg.beta2);
            let c1 = 1.0 - b1.powi(t as i32);
            let c2 = 1.0 - b2.powi(t as i32);
            for i in 0..theta.len() {
                let g = grad[i];
                m1[i] = b1 * m1[i] + (1.0 - b1) * g;
                m2[i] = b2 * m2[i] + (1.0 - b2) * g * g;
                let mhat = m1[i] / c1;
                let vhat = m2[i] / c2;
                theta[i] += alpha * mhat / (vhat.sqrt() + cfg.epsilon);
            }
        }
        Variant::AdaGrad => {
            for i in 0..theta.len() {
                let g = grad[i];
                m2[i] += g * g;
                theta[i] += alpha * g / (m2[i].sqrt() + cfg.epsilon);
            }
        }
        Variant::Gdm => {
            for i in 0..theta.len() {
                let g = grad[i];
                m1[i] = cfg.momentum * m1[i] + alpha * g;
                theta[i] += m1[i] + alpha * g;
            }
        }
        Variant::GdmClassic => {
            for i in 0..theta.len() {
                let g = grad[i];
                m1[i] = cfg.momentum * m1[i] + alpha * g;
                theta[i] += m1[i];
            }
        }
    }
}

fn apply_update(
    variant: Variant,
    cfg: &OptimizerConfig,
    alpha: f64,
    st: &mut Moments,
    it: &mut DualIterate,
    eval: &DualEvaluation,
) {
    st.t += 1;
    update_block(variant, cfg, alpha, st.t, &mut it.lambda, &eval.grad_lambda, &mut st.m1.lambda, &mut st.m2.lambda);
    update_block(variant, cfg, alpha, st.t, &mut it.mu, &eval.grad_mu, &mut st.m1.mu, &mut st.m2.mu);
    update_block(variant, cfg, alpha, st.t, &mut it.s, &eval.grad_s, &mut st.m1.s, &mut st.m2.s);
    it.project();
}

/// Threshold beyond which a finite objective is still treated as divergence.
const DIVERGENCE_LIMIT: f64 = 1e15;

/// Runs projected supergradient ascent from the zero iterate.
pub fn solve_dual(
    prob: &CanonicalProblem,
    variant: Variant,
    config: &OptimizerConfig,
) -> Result<SolveResult, SolveError> {
    solve_dual_observed(prob, variant, config, |_| {})
}

/// [`solve_dual`] with a per-iteration observer; the observer sees every
/// completed update (not the starting point).
pub fn solve_dual_observed(
    prob: &CanonicalProblem,
    variant: Variant,
    config: &OptimizerConfig,
    mut observer: impl FnMut(&StepEvent<'_>),
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let mut ws = DualWorkspace::new(prob);
    let mut it = DualIterate::zeros(prob);
    let mut eval = DualEvaluation::zeros(prob);
    let mut st = Moments::zeros(prob);
    let mut records = Vec::with_capacity(config.max_iters + 1);

    let clock = Instant::now();
    ws.eval_into(&it, &mut eval)?;
    let mut best = eval.objective;
    let mut prev = eval.objective;
    records.push(TraceRecord {
        iter: 0,
        objective: eval.objective,
        best_bound: best,
        elapsed_s: clock.elapsed().as_secs_f64(),
    });

    let mut alpha = config.alpha;
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;

    for k in 0..config.max_iters {
        if let Some(d) = config.decay {
            if k > 0 && k % d.every_n == 0 {
                alpha *= d.factor;
            }
        }
        apply_update(variant, config, alpha, &mut st, &mut it, &eval);
        ws.eval_into(&it, &mut eval)?;
        iterations = k + 1;

        if !eval.objective.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        best = best.max(eval.objective);
        records.push(TraceRecord {
            iter: iterations,
            objective: eval.objective,
            best_bound: best,
            elapsed_s: clock.elapsed().as_secs_f64(),
        });
        observer(&StepEvent {
            iter: iterations,
            objective: eval.objective,
            best_bound: best,
            effective_alpha: alpha,
            iterate: &it,
            evaluation: &eval,
        });
        if eval.objective.abs() > DIVERGENCE_LIMIT {
            status = SolveStatus::Diverged;
            break;
        }
        if (eval.objective - prev).abs() < config.tol {
            status = SolveStatus::Converged;
            break;
        }
        prev = eval.objective;
    }

    Ok(SolveResult {
        status,
        iterations,
        best_bound: best,
        final_iterate: it,
        trace: ConvergenceTrace { records },
        wall_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// One entry of a [`solve_batch`] call.
pub struct BatchJob<'a> {
    pub prob: &'a CanonicalProblem,
    pub variant: Variant,
    pub config: OptimizerConfig,
}

/// Runs independent ascent jobs on one thread each and returns results in
/// job order. Dual evaluations share nothing, so this scales until memory
/// bandwidth saturates.
pub fn solve_batch(jobs: &[BatchJob<'_>]) -> Vec<Result<SolveResult, SolveError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| scope.spawn(move || solve_dual(job.prob, job.variant, &job.config)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver threads do not panic")).collect()
    })
}

/// Optimality gap in percent: `100·(reference − bound)/|reference|`.
/// `None` when the reference objective is zero (the gap is undefined).
pub fn gap_percent(reference: f64, bound: f64) -> Option<f64> {
    if reference == 0.0 {
        None
    } else {
        Some(100.0 * (reference - bound) / reference.abs())
    }
}

pub mod presets;
