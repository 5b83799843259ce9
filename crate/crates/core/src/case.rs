//! Power-network case data: types, a MATPOWER-subset parser, and a
//! round-trip serializer.
//!
//! The accepted format is the function-style MATPOWER case file restricted to
//! what DC dispatch needs: `mpc.baseMVA`, `mpc.bus`, `mpc.branch`, `mpc.gen`
//! and `mpc.gencost` with polynomial costs of degree ≤ 2. Everything else in
//! the file (version string, unknown `mpc.*` fields, extra columns) is
//! ignored. All MW quantities are divided by `baseMVA` exactly once at parse
//! time; the in-memory network is per-unit throughout.

use std::fmt::Write as _;

use thiserror::Error;

/// One bus of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    /// Bus id as written in the case file (arbitrary positive integer).
    pub id: usize,
    /// Active-power load at this bus, per-unit.
    pub load: f64,
    /// True for the single reference (type 3) bus.
    pub is_slack: bool,
}

/// One in-service transmission line.
///
/// `from`/`to` are 0-based indices into [`PowerNetwork::buses`], not file ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    /// Series susceptance, per-unit; derived as 1/x from the file's reactance.
    pub susceptance: f64,
    /// Symmetric flow magnitude limit, per-unit. A `rateA` of 0 in the file
    /// means "unlimited" and is stored as `f64::INFINITY`.
    pub flow_limit: f64,
}

/// One in-service generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// 0-based index into [`PowerNetwork::buses`].
    pub bus: usize,
    /// Output bounds, per-unit. `p_min == p_max` models a fixed unit.
    pub p_min: f64,
    pub p_max: f64,
    /// Quadratic cost coefficient, $/(MW²·h), on the MW output. Always ≥ 0.
    pub cost_quad: f64,
    /// Linear cost coefficient, $/MWh, on the MW output.
    pub cost_lin: f64,
}

/// A parsed, validated network in per-unit quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerNetwork {
    /// Case name from the `function mpc = <name>` header.
    pub name: String,
    /// MVA base used for the per-unit conversion.
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    /// Sum of the constant ($/h) cost terms of all in-service generators.
    pub cost_offset: f64,
}

impl PowerNetwork {
    /// Index of the slack bus. Valid by construction after [`parse_case`].
    pub fn slack_index(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.is_slack)
            .expect("validated network has a slack bus")
    }

    /// Re-designates the slack to the bus with file id `bus_id`.
    pub fn set_slack(&mut self, bus_id: usize) -> Result<(), CaseError> {
        let idx = self
            .buses
            .iter()
            .position(|b| b.id == bus_id)
            .ok_or(CaseError::UnknownBus { table: "slack override", id: bus_id })?;
        for (i, b) in self.buses.iter_mut().enumerate() {
            b.is_slack = i == idx;
        }
        Ok(())
    }
}

/// Headline counts and totals for a network, plus soft warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    pub n_buses: usize,
    pub n_lines: usize,
    pub n_generators: usize,
    pub total_load_mw: f64,
    pub total_capacity_mw: f64,
    /// Non-fatal observations, e.g. total capacity below total load.
    pub warnings: Vec<String>,
}

/// Counts buses/lines/generators and totals load and generation capacity.
pub fn network_stats(net: &PowerNetwork) -> NetworkStats {
    let total_load_mw: f64 = net.buses.iter().map(|b| b.load).sum::<f64>() * net.base_mva;
    let total_capacity_mw: f64 =
        net.generators.iter().map(|g| g.p_max).sum::<f64>() * net.base_mva;
    let mut warnings = Vec::new();
    if total_capacity_mw < total_load_mw {
        warnings.push(format!(
            "total generation capacity {total_capacity_mw} MW is below total load {total_load_mw} MW"
        ));
    }
    NetworkStats {
        n_buses: net.buses.len(),
        n_lines: net.lines.len(),
        n_generators: net.generators.len(),
        total_load_mw,
        total_capacity_mw,
        warnings,
    }
}

/// Errors from parsing or validating a case file.
#[derive(Debug, Error)]
pub enum CaseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: table `{table}`: {msg}")]
    Malformed { line: usize, table: &'static str, msg: String },
    #[error("missing required field `mpc.{0}`")]
    Missing(&'static str),
    #[error("baseMVA must be positive and finite, got {0}")]
    BadBase(f64),
    #[error("duplicate bus id {0}")]
    DuplicateBus(usize),
    #[error("table `{table}` references unknown bus {id}")]
    UnknownBus { table: &'static str, id: usize },
    #[error("no reference (type 3) bus")]
    NoSlack,
    #[error("more than one reference bus: {0} and {1}")]
    MultipleSlack(usize, usize),
    #[error("bus {id} has unsupported type {ty} (expected 1, 2 or 3)")]
    BadBusType { id: usize, ty: f64 },
    #[error("bus {0} is disconnected from the reference bus")]
    Disconnected(usize),
    #[error("gencost model {0} unsupported (only polynomial model 2)")]
    CostModel(f64),
    #[error("gencost row has {0} coefficients; polynomial degree above 2 unsupported")]
    CostDegree(usize),
    #[error("{gens} in-service generators but {rows} gencost rows")]
    GencostMismatch { gens: usize, rows: usize },
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// A numeric table from the file, with the source line of each row.
struct Table {
    rows: Vec<(usize, Vec<f64>)>,
}

/// Raw `mpc.*` assignments of one case file.
struct RawCase {
    name: String,
    base_mva: Option<(usize, f64)>,
    bus: Option<Table>,
    gen: Option<Table>,
    branch: Option<Table>,
    gencost: Option<Table>,
}

/// Strips a `%` comment, respecting nothing else (the subset has no strings
/// containing `%` outside comments).
fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_raw(text: &str) -> Result<RawCase, CaseError> {
    let mut raw = RawCase {
        name: String::new(),
        base_mva: None,
        bus: None,
        gen: None,
        branch: None,
        gencost: None,
    };

    // The format is line-oriented except that a matrix may span lines until
    // its closing `]`. Walk lines, tracking an open table if any.
    let mut open: Option<(&'static str, Table)> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }

        if let Some((name, ref mut table)) = open {
            let (row_text, closed) = match line.find(']') {
                Some(i) => (&line[..i], true),
                None => (line, false),
            };
            push_rows(table, row_text, lineno, name)?;
            if closed {
                store_table(&mut raw, name, open.take().unwrap().1);
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("function") {
            // `function mpc = case5`
            raw.name = rest.rsplit('=').next().unwrap_or("").trim().trim_end_matches(';').to_string();
            continue;
        }

        let Some(rest) = line.strip_prefix("mpc.") else {
            continue; // unrelated MATLAB statement; ignore
        };
        let Some(eq) = rest.find('=') else {
            return Err(CaseError::Syntax { line: lineno, msg: "expected `=`".into() });
        };
        let field = rest[..eq].trim();
        let value = rest[eq + 1..].trim();

        let table_name: Option<&'static str> = match field {
            "bus" => Some("bus"),
            "gen" => Some("gen"),
            "branch" => Some("branch"),
            "gencost" => Some("gencost"),
            _ => None,
        };
        if let Some(name) = table_name {
            let Some(body) = value.strip_prefix('[') else {
                return Err(CaseError::Syntax { line: lineno, msg: format!("`mpc.{field}` must be a matrix") });
            };
            let mut table = Table { rows: Vec::new() };
            match body.find(']') {
                Some(i) => {
                    push_rows(&mut table, &body[..i], lineno, name)?;
                    store_table(&mut raw, name, table);
                }
                None => {
                    push_rows(&mut table, body, lineno, name)?;
                    open = Some((name, table));
                }
            }
        } else if field == "baseMVA" {
            let num = value.trim_end_matches(';').trim();
            let v: f64 = num.parse().map_err(|_| CaseError::Syntax {
                line: lineno,
                msg: format!("bad baseMVA value `{num}`"),
            })?;
            raw.base_mva = Some((lineno, v));
        }
        // other scalar/string fields (version, …): ignored
    }

    if let Some((name, _)) = open {
        return Err(CaseError::Syntax { line: text.lines().count(), msg: format!("unterminated matrix `mpc.{name}`") });
    }
    Ok(raw)
}

/// Parses `;`-separated rows of whitespace/comma-separated numbers.
fn push_rows(table: &mut Table, text: &str, lineno: usize, name: &'static str) -> Result<(), CaseError> {
    for row_text in text.split(';') {
        let mut row = Vec::new();
        for tok in row_text.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| CaseError::Malformed {
                line: lineno,
                table: name,
                msg: format!("bad numeric field `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(CaseError::Malformed {
                    line: lineno,
                    table: name,
                    msg: format!("non-finite field `{tok}`"),
                });
            }
            row.push(v);
        }
        if !row.is_empty() {
            table.rows.push((lineno, row));
        }
    }
    Ok(())
}

fn store_table(raw: &mut RawCase, name: &'static str, table: Table) {
    match name {
        "bus" => raw.bus = Some(table),
        "gen" => raw.gen = Some(table),
        "branch" => raw.branch = Some(table),
        "gencost" => raw.gencost = Some(table),
        _ => unreachable!(),
    }
}

/// Requires `row` to have at least `n` columns.
fn need(row: &(usize, Vec<f64>), n: usize, table: &'static str) -> Result<(), CaseError> {
    if row.1.len() < n {
        return Err(CaseError::Malformed {
            line: row.0,
            table,
            msg: format!("expected at least {n} columns, got {}", row.1.len()),
        });
    }
    Ok(())
}

fn as_bus_id(v: f64, line: usize, table: &'static str) -> Result<usize, CaseError> {
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(CaseError::Malformed { line, table, msg: format!("bad bus id `{v}`") });
    }
    Ok(v as usize)
}

/// Parses and validates a case file into a per-unit [`PowerNetwork`].
///
/// Validation enforces: positive finite `baseMVA`; unique bus ids; exactly
/// one type-3 bus; known bus references everywhere; positive reactances;
/// non-negative quadratic costs; `p_min ≤ p_max`; one gencost row per
/// generator; and connectivity of the in-service line graph. Out-of-service
/// branches and generators (status 0) are dropped before validation.
pub fn parse_case(text: &str) -> Result<PowerNetwork, CaseError> {
    let raw = parse_raw(text)?;

    let (_, base_mva) = raw.base_mva.ok_or(CaseError::Missing("baseMVA"))?;
    if !(base_mva.is_finite() && base_mva > 0.0) {
        return Err(CaseError::BadBase(base_mva));
    }
    let bus_t = raw.bus.ok_or(CaseError::Missing("bus"))?;
    let gen_t = raw.gen.ok_or(CaseError::Missing("gen"))?;
    let branch_t = raw.branch.ok_or(CaseError::Missing("branch"))?;
    let gencost_t = raw.gencost.ok_or(CaseError::Missing("gencost"))?;

    // --- buses -----------------------------------------------------------
    let mut buses = Vec::with_capacity(bus_t.rows.len());
    let mut slack_seen: Option<usize> = None;
    for row in &bus_t.rows {
        need(row, 3, "bus")?;
        let (line, cols) = row;
        let id = as_bus_id(cols[0], *line, "bus")?;
        let ty = cols[1];
        if buses.iter().any(|b: &Bus| b.id == id) {
            return Err(CaseError::DuplicateBus(id));
        }
        let is_slack = match ty {
            t if t == 3.0 => true,
            t if t == 1.0 || t == 2.0 => false,
            t => return Err(CaseError::BadBusType { id, ty: t }),
        };
        if is_slack {
            if let Some(prev) = slack_seen {
                return Err(CaseError::MultipleSlack(prev, id));
            }
            slack_seen = Some(id);
        }
        buses.push(Bus { id, load: cols[2] / base_mva, is_slack });
    }
    if slack_seen.is_none() {
        return Err(CaseError::NoSlack);
    }
    let bus_index = |id: usize, table: &'static str| -> Result<usize, CaseError> {
        buses
            .iter()
            .position(|b| b.id == id)
            .ok_or(CaseError::UnknownBus { table, id })
    };

    // --- branches ---------------------------------------------------------
    let mut lines = Vec::new();
    for row in &branch_t.rows {
        need(row, 11, "branch")?;
        let (lineno, cols) = row;
        if cols[10] == 0.0 {
            continue; // out of service
        }
        let from = bus_index(as_bus_id(cols[0], *lineno, "branch")?, "branch")?;
        let to = bus_index(as_bus_id(cols[1], *lineno, "branch")?, "branch")?;
        let x = cols[3];
        if !(x > 0.0) {
            return Err(CaseError::Malformed {
                line: *lineno,
                table: "branch",
                msg: format!("reactance must be positive, got {x}"),
            });
        }
        let rate_a = cols[5];
        if rate_a < 0.0 {
            return Err(CaseError::Malformed {
                line: *lineno,
                table: "branch",
                msg: format!("rateA must be non-negative, got {rate_a}"),
            });
        }
        let flow_limit = if rate_a == 0.0 { f64::INFINITY } else { rate_a / base_mva };
        lines.push(Line { from, to, susceptance: 1.0 / x, flow_limit });
    }

    // --- generators + costs ------------------------------------------------
    if gen_t.rows.len() != gencost_t.rows.len() {
        return Err(CaseError::GencostMismatch {
            gens: gen_t.rows.len(),
            rows: gencost_t.rows.len(),
        });
    }
    let mut generators = Vec::new();
    let mut cost_offset = 0.0;
    for (grow, crow) in gen_t.rows.iter().zip(&gencost_t.rows) {
        need(grow, 10, "gen")?;
        let (lineno, cols) = grow;
        if cols[7] == 0.0 {
            continue; // out of service
        }
        let bus = bus_index(as_bus_id(cols[0], *lineno, "gen")?, "gen")?;
        let (p_max, p_min) = (cols[8] / base_mva, cols[9] / base_mva);
        if p_min > p_max {
            return Err(CaseError::Malformed {
                line: *lineno,
                table: "gen",
                msg: format!("Pmin {} above Pmax {}", cols[9], cols[8]),
            });
        }

        need(crow, 4, "gencost")?;
        let (clineno, ccols) = crow;
        if ccols[0] != 2.0 {
            return Err(CaseError::CostModel(ccols[0]));
        }
        let ncost = ccols[3];
        if ncost.fract() != 0.0 || ncost < 1.0 || ncost > 3.0 {
            return Err(CaseError::CostDegree(ncost as usize));
        }
        let ncost = ncost as usize;
        need(crow, 4 + ncost, "gencost")?;
        // Coefficients highest degree first: [c2 c1 c0], [c1 c0] or [c0].
        let coeffs = &ccols[4..4 + ncost];
        let (cost_quad, cost_lin, cost_const) = match ncost {
            3 => (coeffs[0], coeffs[1], coeffs[2]),
            2 => (0.0, coeffs[0], coeffs[1]),
            _ => (0.0, 0.0, coeffs[0]),
        };
        if cost_quad < 0.0 {
            return Err(CaseError::Malformed {
                line: *clineno,
                table: "gencost",
                msg: format!("negative quadratic coefficient {cost_quad}"),
            });
        }
        cost_offset += cost_const;
        generators.push(Generator { bus, p_min, p_max, cost_quad, cost_lin });
    }

    // --- connectivity -------------------------------------------------------
    let n = buses.len();
    let mut reached = vec![false; n];
    let slack = buses.iter().position(|b| b.is_slack).unwrap();
    let mut stack = vec![slack];
    reached[slack] = true;
    while let Some(u) = stack.pop() {
        for l in &lines {
            for (a, b) in [(l.from, l.to), (l.to, l.from)] {
                if a == u && !reached[b] {
                    reached[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    if let Some(i) = reached.iter().position(|r| !r) {
        return Err(CaseError::Disconnected(buses[i].id));
    }

    Ok(PowerNetwork {
        name: raw.name,
        base_mva,
        buses,
        lines,
        generators,
        cost_offset,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Picks a file-units value `y` with `from_file(y) == value` when one exists
/// near the obvious candidate, so that serialize → parse is bit-exact.
///
/// Per-unit values were produced by dividing a file value by `baseMVA`; the
/// nearest float to `value·baseMVA` (or a 1-ulp neighbour) divides back to
/// `value` exactly whenever any file value can.
fn exact_file_value(value: f64, to_file: impl Fn(f64) -> f64, from_file: impl Fn(f64) -> f64) -> f64 {
    let y = to_file(value);
    if from_file(y) == value {
        return y;
    }
    for cand in [f64::from_bits(y.to_bits() + 1), f64::from_bits(y.to_bits() - 1)] {
        if from_file(cand) == value {
            return cand;
        }
    }
    y // unreachable for parsed networks; best effort otherwise
}

/// Serializes a network back to the case-file subset.
///
/// Numbers are written in Rust's shortest round-trip form, and MW fields are
/// chosen so that re-parsing recovers the per-unit values bit-for-bit (the
/// aggregate constant cost is written on the first gencost row). Columns not
/// modelled here are emitted with bland defaults.
pub fn to_case_string(net: &PowerNetwork) -> String {
    let base = net.base_mva;
    let mw = |pu: f64| exact_file_value(pu, |v| v * base, |y| y / base);
    let mut out = String::new();
    let name = if net.name.is_empty() { "case" } else { &net.name };
    let _ = writeln!(out, "function mpc = {name}");
    let _ = writeln!(out, "mpc.version = '2';");
    let _ = writeln!(out, "mpc.baseMVA = {base};");

    let _ = writeln!(out, "\n%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin");
    let _ = writeln!(out, "mpc.bus = [");
    for b in &net.buses {
        let ty = if b.is_slack { 3 } else { 1 };
        let _ = writeln!(out, "\t{} {} {} 0 0 0 1 1 0 230 1 1.1 0.9;", b.id, ty, mw(b.load));
    }
    let _ = writeln!(out, "];");

    let _ = writeln!(out, "\n%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin");
    let _ = writeln!(out, "mpc.gen = [");
    for g in &net.generators {
        let _ = writeln!(
            out,
            "\t{} 0 0 0 0 1 {base} 1 {} {};",
            net.buses[g.bus].id,
            mw(g.p_max),
            mw(g.p_min)
        );
    }
    let _ = writeln!(out, "];");

    let _ = writeln!(out, "\n%% fbus tbus r x b rateA rateB rateC ratio angle status");
    let _ = writeln!(out, "mpc.branch = [");
    for l in &net.lines {
        let x = exact_file_value(l.susceptance, |v| 1.0 / v, |y| 1.0 / y);
        let rate = if l.flow_limit.is_infinite() { 0.0 } else { mw(l.flow_limit) };
        let _ = writeln!(
            out,
            "\t{} {} 0 {x} 0 {rate} 0 0 0 0 1;",
            net.buses[l.from].id,
            net.buses[l.to].id
        );
    }
    let _ = writeln!(out, "];");

    let _ = writeln!(out, "\n%% model startup shutdown n coefficients...");
    let _ = writeln!(out, "mpc.gencost = [");
    for (i, g) in net.generators.iter().enumerate() {
        let c0 = if i == 0 { net.cost_offset } else { 0.0 };
        if g.cost_quad != 0.0 {
            let _ = writeln!(out, "\t2 0 0 3 {} {} {c0};", g.cost_quad, g.cost_lin);
        } else {
            let _ = writeln!(out, "\t2 0 0 2 {} {c0};", g.cost_lin);
        }
    }
    let _ = writeln!(out, "];");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::CASE2;

    #[test]
    fn parses_two_bus_case() {
        let net = parse_case(CASE2).unwrap();
        assert_eq!(net.name, "case2");
        assert_eq!(net.base_mva, 100.0);
        assert_eq!(net.buses.len(), 2);
        assert_eq!(net.lines.len(), 1);
        assert_eq!(net.generators.len(), 1);
        assert!(net.buses[0].is_slack);
        assert!(!net.buses[1].is_slack);
        assert_eq!(net.buses[1].load, 1.0); // 100 MW on a 100 MVA base
        assert_eq!(net.lines[0].susceptance, 10.0); // 1/x = 1/0.1
        assert_eq!(net.lines[0].flow_limit, 1.5);
        let g = &net.generators[0];
        assert_eq!((g.p_min, g.p_max), (0.0, 2.0));
        assert_eq!((g.cost_quad, g.cost_lin), (0.0, 5.0));
        assert_eq!(net.cost_offset, 0.0);
        assert_eq!(net.slack_index(), 0);
    }

    #[test]
    fn stats_totals_and_capacity_warning() {
        let net = parse_case(CASE2).unwrap();
        let stats = network_stats(&net);
        assert_eq!(stats.n_buses, 2);
        assert_eq!(stats.n_lines, 1);
        assert_eq!(stats.n_generators, 1);
        assert_eq!(stats.total_load_mw, 100.0);
        assert_eq!(stats.total_capacity_mw, 200.0);
        assert!(stats.warnings.is_empty());

        // Shrink the generator below the load: must warn, not fail.
        let mut small = net.clone();
        small.generators[0].p_max = 0.5;
        let stats = network_stats(&small);
        assert_eq!(stats.warnings.len(), 1);
        assert!(stats.warnings[0].contains("below total load"));
    }

    #[test]
    fn rejects_two_slack_buses() {
        let text = CASE2.replace("2 1 100", "2 3 100");
        match parse_case(&text) {
            Err(CaseError::MultipleSlack(1, 2)) => {}
            other => panic!("expected MultipleSlack, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_slack() {
        let text = CASE2.replace("1 3   0", "1 1   0");
        assert!(matches!(parse_case(&text), Err(CaseError::NoSlack)));
    }

    #[test]
    fn rejects_disconnected_bus() {
        let text = CASE2.replace(
            "\t2 1 100 0 0 0 1 1 0 230 1 1.1 0.9;",
            "\t2 1 100 0 0 0 1 1 0 230 1 1.1 0.9;\n\t3 1 50 0 0 0 1 1 0 230 1 1.1 0.9;",
        );
        assert!(matches!(parse_case(&text), Err(CaseError::Disconnected(3))));
    }

    #[test]
    fn rejects_cubic_cost() {
        let text = CASE2.replace("2 0 0 2 5 0;", "2 0 0 4 1 1 5 0;");
        assert!(matches!(parse_case(&text), Err(CaseError::CostDegree(4))));
    }

    #[test]
    fn rejects_piecewise_linear_cost() {
        let text = CASE2.replace("2 0 0 2 5 0;", "1 0 0 2 5 0;");
        assert!(matches!(parse_case(&text), Err(CaseError::CostModel(m)) if m == 1.0));
    }

    #[test]
    fn malformed_field_names_line_and_table() {
        let text = CASE2.replace("1 2 0 0.1 0 150", "1 2 0 abc 0 150");
        match parse_case(&text) {
            Err(CaseError::Malformed { table: "branch", line, msg }) => {
                assert!(line > 0);
                assert!(msg.contains("abc"));
            }
            other => panic!("expected Malformed, got {other:?}"),
        }
    }

    #[test]
    fn drops_out_of_service_branch_and_gen() {
        // Duplicate the line but out of service; add a dead generator.
        let text = CASE2
            .replace(
                "\t1 2 0 0.1 0 150 0 0 0 0 1;",
                "\t1 2 0 0.1 0 150 0 0 0 0 1;\n\t1 2 0 0.2 0 150 0 0 0 0 0;",
            )
            .replace(
                "\t1 0 0 0 0 1 100 1 200 0;",
                "\t1 0 0 0 0 1 100 1 200 0;\n\t2 0 0 0 0 1 100 0 999 0;",
            )
            .replace("\t2 0 0 2 5 0;", "\t2 0 0 2 5 0;\n\t2 0 0 2 99 7;");
        let net = parse_case(&text).unwrap();
        assert_eq!(net.lines.len(), 1);
        assert_eq!(net.generators.len(), 1);
        // The dead generator's constant cost must not leak into the offset.
        assert_eq!(net.cost_offset, 0.0);
    }

    #[test]
    fn unlimited_rate_a_is_infinite_limit() {
        let text = CASE2.replace("1 2 0 0.1 0 150", "1 2 0 0.1 0 0");
        let net = parse_case(&text).unwrap();
        assert!(net.lines[0].flow_limit.is_infinite());
    }

    #[test]
    fn per_unit_division_happens_exactly_once() {
        let net = parse_case(CASE2).unwrap();
        // Raw file value vs internal value × base.
        assert_eq!(net.buses[1].load * net.base_mva, 100.0);
        assert_eq!(net.generators[0].p_max * net.base_mva, 200.0);
        assert_eq!(net.lines[0].flow_limit * net.base_mva, 150.0);
    }

    #[test]
    fn slack_override() {
        let mut net = parse_case(CASE2).unwrap();
        net.set_slack(2).unwrap();
        assert_eq!(net.slack_index(), 1);
        assert!(net.set_slack(9).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let net = parse_case(CASE2).unwrap();
        let text = to_case_string(&net);
        let again = parse_case(&text).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn round_trip_survives_awkward_values() {
        // Values whose MW↔per-unit conversion rounds: 10/3 MW on base 100.
        let text = CASE2.replace("2 1 100", "2 1 3.3333333333333335");
        let net = parse_case(&text).unwrap();
        let again = parse_case(&to_case_string(&net)).unwrap();
        assert_eq!(net, again);
    }
}
