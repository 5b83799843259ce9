//! End-to-end run orchestration and reporting.
//!
//! [`run_solve`] takes a parsed network through PTDF construction,
//! canonicalization, and dual ascent, and packages the outcome as a
//! [`RunReport`] — one flat record that serializes to JSON and renders as an
//! aligned text table carrying exactly the same fields and values.
//! [`run_compare`] does the setup once, runs every update rule in parallel on
//! the same problem, and ranks the results.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::canonical::{canonicalize, CanonicalError, CanonicalProblem, ProblemKind};
use crate::case::PowerNetwork;
use crate::dual::bound_in_dollars;
use crate::optim::{
    gap_percent, solve_batch, solve_dual, BatchJob, OptimizerConfig, SolveError, SolveResult,
    Variant,
};
use crate::oracle::{solve_reference, OracleError, MAX_REFERENCE_VARS};
use crate::ptdf::{build_ptdf, PtdfError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ptdf(#[from] PtdfError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("no bus with id {0} in this case")]
    UnknownBus(usize),
}

/// The hyperparameters a run actually used, shaped to its update rule:
/// momentum appears only for the momentum rules, the β pair only for Adam.
#[derive(Debug, Clone, Serialize)]
pub struct HyperParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_every: Option<usize>,
    pub tol: f64,
    pub max_iters: usize,
}

impl HyperParams {
    pub fn describe(variant: Variant, config: &OptimizerConfig, preset: Option<&str>) -> Self {
        let momentum_rule = matches!(variant, Variant::Gdm | Variant::GdmClassic);
        HyperParams {
            preset: preset.map(str::to_owned),
            alpha: config.alpha,
            momentum: momentum_rule.then_some(config.momentum),
            beta1: (variant == Variant::Adam).then_some(config.beta1),
            beta2: (variant == Variant::Adam).then_some(config.beta2),
            epsilon: config.epsilon,
            decay_factor: config.decay.map(|d| d.factor),
            decay_every: config.decay.map(|d| d.every_n),
            tol: config.tol,
            max_iters: config.max_iters,
        }
    }
}

/// Everything worth knowing about one completed run. Serializes to the JSON
/// the command line emits with `--json`; [`kv_table`] renders the same record
/// for terminals.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub case_name: String,
    /// Cost model the bound certifies: `lp` or `qp`.
    pub kind: ProblemKind,
    /// Update rule name (`adam`, `adagrad`, `gdm`, `gdm-classic`).
    pub variant: String,
    pub hyperparameters: HyperParams,
    /// `converged`, `max-iters`, or `diverged`.
    pub status: String,
    /// Ascent iterations performed (excluding the starting evaluation).
    pub iterations: usize,
    /// Seconds inside the ascent loop alone.
    pub wall_seconds: f64,
    /// Seconds from network to report: PTDF, canonicalization, ascent, and
    /// the reference solve when one runs. In a comparison the shared setup is
    /// counted once per run, as if each run had been executed alone.
    pub total_seconds: f64,
    /// Best certified lower bound, $/h. A run that diverged before its first
    /// finite evaluation has no certificate; the value is −∞ then (JSON
    /// `null`).
    pub final_bound: f64,
    /// Optimal cost from the reference solver (or the value supplied by the
    /// caller), $/h. Absent for problems past the reference size limit.
    pub reference_objective: Option<f64>,
    /// `100 · (reference − bound) / |reference|` — positive when the bound
    /// sits below the optimum, shrinking toward zero as the bound tightens.
    pub gap_percent: Option<f64>,
    /// Non-fatal observations from canonicalization or the reference solver.
    pub warnings: Vec<String>,
}

/// One solve request: a network plus everything that shapes the run.
pub struct RunRequest<'a> {
    pub net: &'a PowerNetwork,
    pub kind: ProblemKind,
    pub variant: Variant,
    pub config: OptimizerConfig,
    /// Preset name to record in the report, if one was used.
    pub preset: Option<String>,
    /// Known optimal cost in $/h. When given, the reference solver is skipped
    /// and the gap is computed against this value.
    pub reference: Option<f64>,
}

/// A completed run: the report plus the raw artifacts behind it.
pub struct RunOutcome {
    pub report: RunReport,
    pub result: SolveResult,
    pub problem: CanonicalProblem,
}

/// Reference optimum in $/h: the caller's value if supplied, otherwise the
/// reference solver on problems small enough for it. Soft failures (size
/// limit aside, e.g. an infeasible case) become warnings, not errors — the
/// ascent result still stands on its own.
fn resolve_reference(
    prob: &CanonicalProblem,
    supplied: Option<f64>,
    warnings: &mut Vec<String>,
) -> Option<f64> {
    if supplied.is_some() {
        return supplied;
    }
    if prob.n_vars() > MAX_REFERENCE_VARS {
        return None;
    }
    match solve_reference(prob) {
        Ok(sol) => Some(bound_in_dollars(prob, sol.objective)),
        Err(OracleError::TooLarge { .. }) => None,
        Err(e) => {
            warnings.push(format!("reference solver: {e}"));
            None
        }
    }
}

/// Runs one network end to end: PTDF, canonicalization, dual ascent, and —
/// for small problems — a reference solve for the gap.
pub fn run_solve(request: &RunRequest<'_>) -> Result<RunOutcome, PipelineError> {
    let t0 = Instant::now();
    let ptdf = build_ptdf(request.net)?;
    let problem = canonicalize(request.net, &ptdf, request.kind)?;
    let result = solve_dual(&problem, request.variant, &request.config)?;
    let mut warnings = problem.warnings.clone();
    let reference = resolve_reference(&problem, request.reference, &mut warnings);
    let total_seconds = t0.elapsed().as_secs_f64();

    let final_bound = bound_in_dollars(&problem, result.best_bound);
    let report = RunReport {
        case_name: request.net.name.clone(),
        kind: request.kind,
        variant: request.variant.name().to_owned(),
        hyperparameters: HyperParams::describe(request.variant, &request.config, request.preset.as_deref()),
        status: result.status.name().to_owned(),
        iterations: result.iterations,
        wall_seconds: result.wall_seconds,
        total_seconds,
        final_bound,
        reference_objective: reference,
        gap_percent: reference.and_then(|r| gap_percent(r, final_bound)),
        warnings,
    };
    Ok(RunOutcome { report, result, problem })
}

/// One entry of a comparison: an update rule with its configuration.
pub struct CompareEntry {
    pub variant: Variant,
    pub config: OptimizerConfig,
    pub preset: Option<String>,
}

/// A ranked comparison of update rules on one problem.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub case_name: String,
    pub kind: ProblemKind,
    /// Shared reference optimum, $/h (see [`RunReport::reference_objective`]).
    pub reference_objective: Option<f64>,
    /// Per-rule reports, best first: ranked by gap, ties broken by ascent
    /// time. The gap is a fixed decreasing function of the bound, so the
    /// ranking is by descending bound — which also covers runs without a
    /// reference.
    pub runs: Vec<RunReport>,
}

pub struct CompareOutcome {
    pub report: CompareReport,
    /// Raw results in the same order as `report.runs`.
    pub results: Vec<SolveResult>,
    pub problem: CanonicalProblem,
}

/// Solves the same problem under several update rules (in parallel) and ranks
/// the outcomes. Setup — PTDF, canonicalization, reference solve — happens
/// once and is shared.
pub fn run_compare(
    net: &PowerNetwork,
    kind: ProblemKind,
    entries: &[CompareEntry],
    reference: Option<f64>,
) -> Result<CompareOutcome, PipelineError> {
    let t0 = Instant::now();
    let ptdf = build_ptdf(net)?;
    let problem = canonicalize(net, &ptdf, kind)?;
    let mut warnings = problem.warnings.clone();
    let reference = resolve_reference(&problem, reference, &mut warnings);
    let setup_seconds = t0.elapsed().as_secs_f64();

    let jobs: Vec<BatchJob<'_>> = entries
        .iter()
        .map(|e| BatchJob { prob: &problem, variant: e.variant, config: e.config })
        .collect();
    let mut paired: Vec<(RunReport, SolveResult)> = Vec::with_capacity(entries.len());
    for (entry, result) in entries.iter().zip(solve_batch(&jobs)) {
        let result = result?;
        let final_bound = bound_in_dollars(&problem, result.best_bound);
        let report = RunReport {
            case_name: net.name.clone(),
            kind,
            variant: entry.variant.name().to_owned(),
            hyperparameters: HyperParams::describe(
                entry.variant,
                &entry.config,
                entry.preset.as_deref(),
            ),
            status: result.status.name().to_owned(),
            iterations: result.iterations,
            wall_seconds: result.wall_seconds,
            total_seconds: setup_seconds + result.wall_seconds,
            final_bound,
            reference_objective: reference,
            gap_percent: reference.and_then(|r| gap_percent(r, final_bound)),
            warnings: warnings.clone(),
        };
        paired.push((report, result));
    }

    // Rank: gap ascending ⇔ bound descending; ascent time breaks ties.
    paired.sort_by(|(a, _), (b, _)| {
        b.final_bound
            .partial_cmp(&a.final_bound)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.wall_seconds
                    .partial_cmp(&b.wall_seconds)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let (runs, results): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
    let report = CompareReport {
        case_name: net.name.clone(),
        kind,
        reference_objective: reference,
        runs,
    };
    Ok(CompareOutcome { report, results, problem })
}

/// Moves the slack designation to the bus with the given file id.
pub fn override_slack(net: &mut PowerNetwork, bus_id: usize) -> Result<(), PipelineError> {
    let idx = net
        .buses
        .iter()
        .position(|b| b.id == bus_id)
        .ok_or(PipelineError::UnknownBus(bus_id))?;
    for (i, bus) in net.buses.iter_mut().enumerate() {
        bus.is_slack = i == idx;
    }
    Ok(())
}

/// Renders any serialized report as an aligned two-column table — one row per
/// leaf field, nested fields flattened with dotted keys. Values are printed
/// exactly as their JSON tokens (strings unquoted), so terminal and `--json`
/// output never disagree.
pub fn kv_table<T: Serialize>(report: &T) -> String {
    let value = serde_json::to_value(report).expect("reports always serialize");
    let mut rows: Vec<(String, String)> = Vec::new();
    flatten("", &value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}

fn token(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, val, rows);
            }
        }
        serde_json::Value::Array(items)
            if items.iter().all(|i| !i.is_object() && !i.is_array()) =>
        {
            let inner: Vec<String> = items.iter().map(token).collect();
            rows.push((prefix.to_owned(), format!("[{}]", inner.join(", "))));
        }
        serde_json::Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), item, rows);
            }
        }
        scalar => rows.push((prefix.to_owned(), token(scalar))),
    }
}

impl CompareReport {
    /// Compact ranking matrix for terminals: one row per run, best first.
    /// Full precision lives in the JSON; these cells are rounded for reading.
    pub fn summary_table(&self) -> String {
        let mut grid: Vec<[String; 6]> = vec![[
            "variant".into(),
            "status".into(),
            "iterations".into(),
            "ascent_s".into(),
            "bound_per_h".into(),
            "gap_percent".into(),
        ]];
        for r in &self.runs {
            grid.push([
                r.variant.clone(),
                r.status.clone(),
                r.iterations.to_string(),
                format!("{:.4}", r.wall_seconds),
                format!("{:.6}", r.final_bound),
                r.gap_percent.map_or("-".into(), |g| format!("{g:.6}")),
            ]);
        }
        let mut widths = [0usize; 6];
        for row in &grid {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        for row in &grid {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{parse_case, Bus, Generator, PowerNetwork};
    use crate::fixtures;
    use crate::optim::presets;

    fn case5() -> PowerNetwork {
        parse_case(fixtures::CASE5).unwrap()
    }

    #[test]
    fn solve_report_closes_the_gap_on_the_five_bus_case() {
        let net = case5();
        let config = presets::resolve("default", Variant::Adam, ProblemKind::Lp).unwrap();
        let request = RunRequest {
            net: &net,
            kind: ProblemKind::Lp,
            variant: Variant::Adam,
            config,
            preset: Some("default".into()),
            reference: None,
        };
        let out = run_solve(&request).unwrap();
        let r = &out.report;
        assert_eq!(r.case_name, "case5");
        assert_eq!(r.variant, "adam");
        let reference = r.reference_objective.expect("small case gets a reference");
        assert!((reference - 17305.915141430950).abs() <= 1e-6 * reference);
        let gap = r.gap_percent.expect("reference present implies a gap");
        assert!((0.0..0.1).contains(&gap), "gap {gap}");
        assert!(r.final_bound <= reference + 1e-6);
        assert!(r.total_seconds >= r.wall_seconds);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        assert_eq!(r.iterations, out.result.iterations);
    }

    #[test]
    fn supplied_reference_is_used_verbatim() {
        let net = case5();
        let config = presets::resolve("default", Variant::AdaGrad, ProblemKind::Lp).unwrap();
        let request = RunRequest {
            net: &net,
            kind: ProblemKind::Lp,
            variant: Variant::AdaGrad,
            config,
            preset: None,
            reference: Some(20000.0),
        };
        let out = run_solve(&request).unwrap();
        assert_eq!(out.report.reference_objective, Some(20000.0));
        // Bound approaches the true optimum ≈ 17305.9, so against the
        // inflated reference the gap lands near 13.5%.
        let gap = out.report.gap_percent.unwrap();
        assert!((13.0..14.0).contains(&gap), "gap {gap}");
    }

    #[test]
    fn hyperparameters_are_shaped_to_the_rule() {
        let cfg = OptimizerConfig::default();
        let adam = HyperParams::describe(Variant::Adam, &cfg, Some("default"));
        assert!(adam.beta1.is_some() && adam.beta2.is_some() && adam.momentum.is_none());
        assert_eq!(adam.preset.as_deref(), Some("default"));
        let gdm = HyperParams::describe(Variant::Gdm, &cfg, None);
        assert!(gdm.momentum.is_some() && gdm.beta1.is_none() && gdm.beta2.is_none());
        let ada = HyperParams::describe(Variant::AdaGrad, &cfg, None);
        assert!(ada.momentum.is_none() && ada.beta1.is_none() && ada.beta2.is_none());
    }

    #[test]
    fn table_and_json_carry_identical_fields_and_values() {
        let net = case5();
        let base = presets::resolve("default", Variant::Adam, ProblemKind::Qp).unwrap();
        let mut config = base;
        config.max_iters = 50; // speed — agreement is structural
        let request = RunRequest {
            net: &net,
            kind: ProblemKind::Qp,
            variant: Variant::Adam,
            config,
            preset: Some("default".into()),
            reference: None,
        };
        let out = run_solve(&request).unwrap();
        let table = kv_table(&out.report);
        let json: serde_json::Value = serde_json::to_value(&out.report).unwrap();

        // Every leaf of the JSON appears in the table as `key  token`.
        let mut rows: Vec<(String, String)> = Vec::new();
        flatten("", &json, &mut rows);
        assert!(!rows.is_empty());
        for (key, tok) in &rows {
            let line = table
                .lines()
                .find(|l| l.starts_with(key.as_str()) && l[key.len()..].starts_with(' '))
                .unwrap_or_else(|| panic!("table lacks row for {key}"));
            assert_eq!(line[key.len()..].trim_start(), tok, "row {key}");
        }
        // And nothing else: same number of rows as leaves.
        assert_eq!(table.lines().count(), rows.len());
        // Field order survives serialization (ordered maps).
        assert!(rows[0].0 == "case_name" && rows[1].0 == "kind");
        // Floats round-trip: the bound token parses back to the exact value.
        let bound_tok = &rows.iter().find(|(k, _)| k == "final_bound").unwrap().1;
        assert_eq!(bound_tok.parse::<f64>().unwrap(), out.report.final_bound);
    }

    #[test]
    fn compare_ranks_by_bound_then_time() {
        let net = case5();
        let entries: Vec<CompareEntry> = [Variant::Adam, Variant::AdaGrad, Variant::Gdm]
            .into_iter()
            .map(|v| {
                let config = presets::resolve("default", v, ProblemKind::Lp).unwrap();
                CompareEntry { variant: v, config, preset: Some("default".into()) }
            })
            .collect();
        let out = run_compare(&net, ProblemKind::Lp, &entries, None).unwrap();
        let runs = &out.report.runs;
        assert_eq!(runs.len(), 3);
        let mut seen: Vec<&str> = runs.iter().map(|r| r.variant.as_str()).collect();
        seen.sort_unstable();
        assert_eq!(seen, ["adagrad", "adam", "gdm"]);
        for pair in runs.windows(2) {
            assert!(
                pair[0].final_bound >= pair[1].final_bound,
                "ranking broken: {} then {}",
                pair[0].final_bound,
                pair[1].final_bound
            );
        }
        let reference = out.report.reference_objective.unwrap();
        for r in runs {
            assert_eq!(r.reference_objective, Some(reference));
            assert!(r.total_seconds >= r.wall_seconds);
        }
        assert_eq!(out.results.len(), 3);
        // results stay aligned with runs after ranking
        for (rep, res) in runs.iter().zip(&out.results) {
            assert_eq!(rep.iterations, res.iterations);
            assert_eq!(rep.status, res.status.name());
        }
        let table = out.report.summary_table();
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().next().unwrap().starts_with("variant"));
        // Row order in the matrix equals run order in the JSON.
        for (line, run) in table.lines().skip(1).zip(runs) {
            assert!(line.starts_with(run.variant.as_str()));
        }
    }

    #[test]
    fn infeasible_case_surfaces_warnings_not_errors() {
        // Two-bus network whose load exceeds every generator's reach.
        let net = PowerNetwork {
            name: "overload".into(),
            base_mva: 100.0,
            buses: vec![
                Bus { id: 1, load: 0.0, is_slack: true },
                Bus { id: 2, load: 5.0, is_slack: false },
            ],
            lines: vec![crate::case::Line { from: 0, to: 1, susceptance: 10.0, flow_limit: 4.0 }],
            generators: vec![Generator { bus: 0, p_min: 0.0, p_max: 1.0, cost_quad: 0.0, cost_lin: 10.0 }],
            cost_offset: 0.0,
        };
        let request = RunRequest {
            net: &net,
            kind: ProblemKind::Lp,
            variant: Variant::Adam,
            config: OptimizerConfig { max_iters: 200, ..Default::default() },
            preset: None,
            reference: None,
        };
        let out = run_solve(&request).unwrap();
        assert!(out.report.reference_objective.is_none());
        assert!(out.report.gap_percent.is_none());
        assert!(
            out.report.warnings.iter().any(|w| w.contains("reference solver")),
            "{:?}",
            out.report.warnings
        );
    }

    #[test]
    fn slack_override_moves_the_flag_or_rejects_unknown_ids() {
        let mut net = case5();
        override_slack(&mut net, 3).unwrap();
        let idx = net.slack_index();
        assert_eq!(net.buses[idx].id, 3);
        assert_eq!(net.buses.iter().filter(|b| b.is_slack).count(), 1);
        match override_slack(&mut net, 99) {
            Err(PipelineError::UnknownBus(99)) => {}
            other => panic!("expected UnknownBus, got {other:?}"),
        }
    }
}
