//! Race the ascent rules — Adam, AdaGrad, and heavy-ball momentum — on the
//! same problem and rank them by gap, then by time.
//!
//! The three rules share every evaluation detail (same dual, same starting
//! point, same stopping test); only the update differs, so the ranking
//! isolates the optimizer itself. Runs execute in parallel threads.
//!
//! Run with: `cargo run --example compare_optimizers`

use std::error::Error;

use gridbound::canonical::ProblemKind;
use gridbound::case::parse_case;
use gridbound::fixtures;
use gridbound::optim::{presets, Variant};
use gridbound::report::{run_compare, CompareEntry};

fn main() -> Result<(), Box<dyn Error>> {
    let net = parse_case(fixtures::CASE5)?;

    for kind in [ProblemKind::Lp, ProblemKind::Qp] {
        let entries: Vec<CompareEntry> = [Variant::Adam, Variant::AdaGrad, Variant::Gdm]
            .into_iter()
            .map(|variant| CompareEntry {
                variant,
                config: presets::default_for(variant, kind),
                preset: None,
            })
            .collect();
        let out = run_compare(&net, kind, &entries, None)?;

        let label = match kind {
            ProblemKind::Lp => "linear costs",
            ProblemKind::Qp => "quadratic costs",
        };
        println!("{} — {label}", out.report.case_name);
        match out.report.reference_objective {
            Some(r) => println!("reference optimum {r:.6} $/h"),
            None => println!("reference unavailable"),
        }
        println!("{}", out.report.summary_table());
    }
    println!("every bound above is a valid certificate — ranking only says which rule tightened it fastest.");
    Ok(())
}
