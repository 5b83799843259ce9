//! The headline capability end to end: a certified lower bound on dispatch
//! cost, computed by projected gradient ascent on the closed-form Lagrangian
//! dual of the canonical problem.
//!
//! Every dual iterate — not just the last — evaluates to a true lower bound
//! on the optimal cost, so the solver can stop anytime and still hand back a
//! certificate.
//!
//! Run with: `cargo run --example lower_bound`

use std::error::Error;

use gridbound::canonical::ProblemKind;
use gridbound::case::parse_case;
use gridbound::fixtures;
use gridbound::optim::Variant;
use gridbound::report::{kv_table, run_solve, RunRequest};

fn main() -> Result<(), Box<dyn Error>> {
    let net = parse_case(fixtures::CASE5)?;

    let request = RunRequest {
        net: &net,
        kind: ProblemKind::Lp,
        variant: Variant::Adam,
        // Tuned per-rule defaults; see the `presets` module for the catalog.
        config: gridbound::optim::presets::default_for(Variant::Adam, ProblemKind::Lp),
        preset: None,
        // Small cases get an exact reference solve automatically, so the
        // report carries the true optimality gap.
        reference: None,
    };
    let out = run_solve(&request)?;

    println!("{}", kv_table(&out.report).trim_end());

    println!("\nbound trajectory (selected iterations, $/h):");
    println!("  iter    dual objective      best bound so far");
    let in_dollars = |v: f64| gridbound::dual::bound_in_dollars(&out.problem, v);
    let records = &out.result.trace.records;
    for idx in [0usize, 1, 2, 5, 10, 50, 100, 500, 1000] {
        if let Some(r) = records.get(idx) {
            println!("  {:>5}   {:>16.6}    {:>16.6}", r.iter, in_dollars(r.objective), in_dollars(r.best_bound));
        }
    }
    if let Some(last) = records.last() {
        println!("  {:>5}   {:>16.6}    {:>16.6}   (final)", last.iter, in_dollars(last.objective), in_dollars(last.best_bound));
    }

    if let (Some(reference), Some(gap)) = (out.report.reference_objective, out.report.gap_percent) {
        println!("\ncertificate: bound {:.6} ≤ optimum {:.6} $/h (gap {:.4}%)", out.report.final_bound, reference, gap);
    }
    Ok(())
}
