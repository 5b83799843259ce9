//! Command-line front end: `solve` computes one certified lower bound,
//! `compare` races every update rule on the same case and ranks them.
//!
//! Exit codes: 0 when the run produced a certificate (converged or hit the
//! iteration budget), 1 when ascent diverged (for `compare`, when every rule
//! diverged), 2 for anything that prevented a run — bad flags, unreadable or
//! malformed case files, preset conflicts, invalid hyperparameters.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gridbound::canonical::ProblemKind;
use gridbound::case::parse_case;
use gridbound::optim::{presets, Decay, OptimizerConfig, SolveStatus, Variant};
use gridbound::report::{
    kv_table, override_slack, run_compare, run_solve, CompareEntry, RunRequest,
};

#[derive(Parser)]
#[command(
    name = "gridbound",
    version,
    about = "Certified lower bounds for DC optimal power flow via dual ascent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a certified lower bound with one update rule.
    Solve(SolveArgs),
    /// Run every update rule on one case and rank the results.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CostChoice {
    /// Linear generation costs.
    Linear,
    /// Convex quadratic generation costs.
    Quadratic,
}

impl From<CostChoice> for ProblemKind {
    fn from(c: CostChoice) -> Self {
        match c {
            CostChoice::Linear => ProblemKind::Lp,
            CostChoice::Quadratic => ProblemKind::Qp,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptChoice {
    Adam,
    Adagrad,
    Gdm,
    /// Textbook heavy-ball momentum (see `gdm` for the benchmark form).
    GdmClassic,
}

impl From<OptChoice> for Variant {
    fn from(o: OptChoice) -> Self {
        match o {
            OptChoice::Adam => Variant::Adam,
            OptChoice::Adagrad => Variant::AdaGrad,
            OptChoice::Gdm => Variant::Gdm,
            OptChoice::GdmClassic => Variant::GdmClassic,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a case file (MATPOWER-style subset).
    case: PathBuf,

    /// Cost model to bound.
    #[arg(long, value_enum)]
    cost: CostChoice,

    /// Base step size.
    #[arg(long)]
    alpha: Option<f64>,

    /// Momentum coefficient ρ (momentum rules only).
    #[arg(long)]
    momentum: Option<f64>,

    /// First-moment coefficient β₁ (adam only).
    #[arg(long)]
    beta1: Option<f64>,

    /// Second-moment coefficient β₂ (adam only).
    #[arg(long)]
    beta2: Option<f64>,

    /// Geometric step decay factor, applied every iteration.
    #[arg(long)]
    decay: Option<f64>,

    /// Stop when the objective moves less than this between iterations.
    #[arg(long)]
    tol: Option<f64>,

    /// Iteration budget.
    #[arg(long)]
    max_iters: Option<usize>,

    /// Named hyperparameter preset; explicit flags override its fields.
    /// `default` adapts to the chosen rule and cost model.
    #[arg(long)]
    preset: Option<String>,

    /// Bus id to use as the angle reference instead of the file's choice.
    #[arg(long)]
    slack: Option<usize>,

    /// Write the iteration trace as CSV (in `compare`, one file per rule,
    /// the rule name inserted before the extension).
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,

    /// Known optimal cost in $/h; skips the built-in reference solver.
    #[arg(long)]
    reference: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Update rule.
    #[arg(long, value_enum)]
    opt: OptChoice,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Accepted for symmetry with `solve`; `compare` always runs every rule.
    #[arg(long, value_enum)]
    opt: Option<OptChoice>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve_command(args),
        Command::Compare(args) => compare_command(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Reads, parses, and (optionally) re-references a case file.
fn load_network(common: &CommonArgs) -> Result<gridbound::case::PowerNetwork, Box<dyn Error>> {
    let text = fs::read_to_string(&common.case)
        .map_err(|e| format!("cannot read {}: {e}", common.case.display()))?;
    let mut net = parse_case(&text)
        .map_err(|e| format!("cannot parse {}: {e}", common.case.display()))?;
    if let Some(bus) = common.slack {
        override_slack(&mut net, bus)?;
    }
    Ok(net)
}

/// Base configuration (preset or tuned default) with flag overrides applied.
/// `restrict` governs which rule-specific flags this rule consumes — `solve`
/// passes `None` so a mismatched flag is an error; `compare` passes the rule
/// so each flag lands only where it applies.
fn build_config(
    common: &CommonArgs,
    variant: Variant,
    kind: ProblemKind,
    restrict: Option<Variant>,
) -> Result<OptimizerConfig, Box<dyn Error>> {
    let momentum_rule = matches!(variant, Variant::Gdm | Variant::GdmClassic);
    if restrict.is_none() {
        if common.momentum.is_some() && !momentum_rule {
            return Err(format!(
                "--momentum applies to the momentum rules, not {}",
                variant.name()
            )
            .into());
        }
        if (common.beta1.is_some() || common.beta2.is_some()) && variant != Variant::Adam {
            return Err(format!("--beta1/--beta2 apply to adam, not {}", variant.name()).into());
        }
    }

    let mut config = match &common.preset {
        Some(name) => presets::resolve(name, variant, kind)?,
        None => presets::default_for(variant, kind),
    };
    if let Some(a) = common.alpha {
        config.alpha = a;
    }
    if momentum_rule {
        if let Some(m) = common.momentum {
            config.momentum = m;
        }
    }
    if variant == Variant::Adam {
        if let Some(b) = common.beta1 {
            config.beta1 = b;
        }
        if let Some(b) = common.beta2 {
            config.beta2 = b;
        }
    }
    if let Some(f) = common.decay {
        config.decay = Some(Decay { factor: f, every_n: 1 });
    }
    if let Some(t) = common.tol {
        config.tol = t;
    }
    if let Some(n) = common.max_iters {
        config.max_iters = n;
    }
    Ok(config)
}

fn write_if_asked(path: &Option<PathBuf>, content: &str) -> Result<(), Box<dyn Error>> {
    if let Some(p) = path {
        fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
    }
    Ok(())
}

fn solve_command(args: SolveArgs) -> Result<ExitCode, Box<dyn Error>> {
    let net = load_network(&args.common)?;
    let kind: ProblemKind = args.common.cost.into();
    let variant: Variant = args.opt.into();
    let config = build_config(&args.common, variant, kind, None)?;

    let request = RunRequest {
        net: &net,
        kind,
        variant,
        config,
        preset: args.common.preset.clone(),
        reference: args.common.reference,
    };
    let out = run_solve(&request)?;

    write_if_asked(&args.common.trace, &out.result.trace.to_csv_string())?;
    let json = serde_json::to_string_pretty(&out.report)? + "\n";
    write_if_asked(&args.common.json, &json)?;
    print!("{}", kv_table(&out.report));

    Ok(if out.result.status == SolveStatus::Diverged {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

/// `out.csv` → `out.adam.csv`; extensionless paths just append the rule name.
fn trace_path_for(base: &Path, rule: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{rule}.{ext}"),
        None => format!("{stem}.{rule}"),
    };
    base.with_file_name(name)
}

fn compare_command(args: CompareArgs) -> Result<ExitCode, Box<dyn Error>> {
    let net = load_network(&args.common)?;
    let kind: ProblemKind = args.common.cost.into();

    let mut entries = Vec::new();
    for variant in [Variant::Adam, Variant::AdaGrad, Variant::Gdm] {
        entries.push(CompareEntry {
            variant,
            config: build_config(&args.common, variant, kind, Some(variant))?,
            preset: args.common.preset.clone(),
        });
    }
    let out = run_compare(&net, kind, &entries, args.common.reference)?;

    if let Some(base) = &args.common.trace {
        for (run, result) in out.report.runs.iter().zip(&out.results) {
            let path = trace_path_for(base, &run.variant);
            fs::write(&path, result.trace.to_csv_string())
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
    }
    let json = serde_json::to_string_pretty(&out.report)? + "\n";
    write_if_asked(&args.common.json, &json)?;

    println!("case {} ({})", out.report.case_name, kind_name(kind));
    match out.report.reference_objective {
        Some(r) => println!("reference {r} $/h"),
        None => println!("reference unavailable"),
    }
    println!();
    print!("{}", out.report.summary_table());

    let all_diverged = out
        .results
        .iter()
        .all(|r| r.status == SolveStatus::Diverged);
    Ok(if all_diverged { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn kind_name(kind: ProblemKind) -> &'static str {
    match kind {
        ProblemKind::Lp => "linear costs",
        ProblemKind::Qp => "quadratic costs",
    }
}
