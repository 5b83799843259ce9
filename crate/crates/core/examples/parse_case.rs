//! Parse a case file, inspect it, and write it back out.
//!
//! Run with: `cargo run --example parse_case`

use std::error::Error;

use gridbound::case::{network_stats, parse_case, to_case_string};
use gridbound::fixtures;

fn main() -> Result<(), Box<dyn Error>> {
    // Fixtures ship inside the library so examples run with no setup; any
    // MATPOWER-style file with bus/gen/branch/gencost tables works the same.
    let net = parse_case(fixtures::CASE5)?;

    println!("case      {}", net.name);
    println!("base MVA  {}", net.base_mva);

    let stats = network_stats(&net);
    println!(
        "network   {} buses, {} lines, {} generators",
        stats.n_buses, stats.n_lines, stats.n_generators
    );
    println!("load      {:.1} MW", stats.total_load_mw);
    println!("capacity  {:.1} MW", stats.total_capacity_mw);
    for w in &stats.warnings {
        println!("warning   {w}");
    }

    println!("\nper-unit view (base {} MVA):", net.base_mva);
    for bus in &net.buses {
        let tag = if bus.is_slack { "  slack" } else { "" };
        println!("  bus {:>2}  load {:.3} pu{tag}", bus.id, bus.load);
    }
    for (i, g) in net.generators.iter().enumerate() {
        println!(
            "  gen {:>2}  at bus {}  range [{:.2}, {:.2}] pu  cost {}·p + {}·p² $/h (MW units)",
            i, net.buses[g.bus].id, g.p_min, g.p_max, g.cost_lin, g.cost_quad
        );
    }

    // The serializer writes the same dialect the parser reads, with values
    // chosen so the round trip reproduces every per-unit number bit for bit.
    let text = to_case_string(&net);
    let again = parse_case(&text)?;
    assert_eq!(net, again, "round trip must be lossless");
    println!("\nround trip: serialize → parse reproduces the network exactly");
    println!("\nfirst lines of the serialized file:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
