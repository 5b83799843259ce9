//! Bound a whole portfolio of cases in one parallel batch.
//!
//! `solve_batch` fans independent runs out across threads and returns results
//! in submission order — the pattern for screening many cases, cost models,
//! or hyperparameter settings at once.
//!
//! Run with: `cargo run --example batch_solve`

use std::error::Error;

use gridbound::canonical::{canonicalize, CanonicalProblem, ProblemKind};
use gridbound::case::parse_case;
use gridbound::dual::bound_in_dollars;
use gridbound::fixtures;
use gridbound::optim::{presets, solve_batch, BatchJob, Variant};
use gridbound::ptdf::build_ptdf;

fn main() -> Result<(), Box<dyn Error>> {
    // Every fixture, under the cost model its data calls for.
    let cases = [
        ("case2", fixtures::CASE2, ProblemKind::Lp),
        ("case3q", fixtures::CASE3Q, ProblemKind::Qp),
        ("case5", fixtures::CASE5, ProblemKind::Lp),
        ("case5q", fixtures::CASE5Q, ProblemKind::Qp),
    ];
    let rules = [Variant::Adam, Variant::AdaGrad, Variant::Gdm];

    // Canonicalize once per case; jobs borrow the problems.
    let mut problems: Vec<(&str, ProblemKind, CanonicalProblem)> = Vec::new();
    for (name, text, kind) in cases {
        let net = parse_case(text)?;
        let ptdf = build_ptdf(&net)?;
        problems.push((name, kind, canonicalize(&net, &ptdf, kind)?));
    }

    let jobs: Vec<BatchJob<'_>> = problems
        .iter()
        .flat_map(|(_, kind, prob)| {
            rules.iter().map(|&variant| BatchJob {
                prob,
                variant,
                config: presets::default_for(variant, *kind),
            })
        })
        .collect();

    let t0 = std::time::Instant::now();
    let results = solve_batch(&jobs);
    let elapsed = t0.elapsed().as_secs_f64();

    println!("case     model  rule      status      iterations  bound $/h");
    for ((case_idx, rule), result) in
        (0..problems.len()).flat_map(|c| rules.iter().map(move |&r| (c, r))).zip(results)
    {
        let (name, kind, prob) = &problems[case_idx];
        let result = result?;
        let model = match kind {
            ProblemKind::Lp => "lp",
            ProblemKind::Qp => "qp",
        };
        println!(
            "{name:<8} {model:<6} {:<9} {:<11} {:>10}  {:>12.4}",
            rule.name(),
            result.status.name(),
            result.iterations,
            bound_in_dollars(prob, result.best_bound)
        );
    }
    println!("\n{} runs in {elapsed:.2}s wall (parallel batch)", jobs.len());
    Ok(())
}
