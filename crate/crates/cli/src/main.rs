//! `impartial`: run selection mechanisms, verify them over graph classes and
//! check gadget lower bounds.
//!
//! Exit status: 0 on success (selection printed, class verified, or
//! impossibility confirmed), 1 when a check ran and failed (violation, gap
//! above the threshold, or a satisfiable gadget query), 2 on usage, parse or
//! domain errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use impartial_core::ratio::{Exact, RationalJson};
use impartial_core::{
    additive_gap, build_cycle_family, build_k_family, build_two_path_orbit, parse_rational, run,
    sample_class, sweep, verify_impossibility, Aggregator, Digraph, GadgetFamily, GraphClassSpec,
    ImpossibilityOutcome, ImpossibilityQuery, Mechanism, Rational, SweepConfig, VerificationReport,
};
use serde_json::{json, Value};

const BUDGET_VAR: &str = "IMPARTIAL_GRAPH_BUDGET";
const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Parser)]
#[command(
    name = "impartial",
    version,
    about = "Impartial vertex selection in nomination digraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on one graph file (line or JSON format).
    Select(SelectArgs),
    /// Check impartiality and the worst additive gap over a graph class.
    Verify(VerifyArgs),
    /// Search a gadget family for an assignment meeting the guarantee.
    Gadget(GadgetArgs),
    /// Print every graph of a class, one JSON object per line.
    Enumerate(ClassArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismName {
    Pwru,
    Apwru,
    ApwruPivotal,
    ApwruDeletion,
}

impl MechanismName {
    fn build(self, k: Option<usize>) -> Result<Mechanism, String> {
        let name = self.to_possible_value().expect("no skipped variants");
        Mechanism::from_name(name.get_name(), k)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cycle,
    Kfam,
    Fig4,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, value_enum)]
    mechanism: MechanismName,
    /// Selection budget, required by apwru-deletion.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ClassArgs {
    #[arg(long)]
    n: usize,
    /// Maximum outdegree; omit for the unbounded class.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    mechanism: MechanismName,
    #[command(flatten)]
    class: ClassArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    objective: Aggregator,
    /// Gap threshold as `p/q` or an integer.
    #[arg(long, value_parser = rational_arg)]
    alpha: Rational,
    /// Check this many seeded uniform samples instead of the whole class.
    #[arg(long, requires = "seed")]
    sample: Option<u64>,
    #[arg(long, requires = "sample")]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GadgetArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    objective: Aggregator,
    #[arg(long, value_parser = rational_arg)]
    alpha: Rational,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    json: bool,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn rational_json(r: Rational) -> Value {
    serde_json::to_value(RationalJson::from(r)).expect("rational serializes")
}

fn budget() -> Result<u128, String> {
    match std::env::var(BUDGET_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("{BUDGET_VAR} must be a nonnegative integer, got `{s}`")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn class_spec(args: &ClassArgs) -> Result<GraphClassSpec, String> {
    GraphClassSpec::new(args.n, args.d).map_err(|e| e.to_string())
}

/// Refuses classes above the graph budget.
fn check_budget(spec: GraphClassSpec) -> Result<(), String> {
    let limit = budget()?;
    match spec.size() {
        Some(size) if size <= limit => Ok(()),
        size => Err(format!(
            "{spec} has {} graphs, above the budget of {limit}; use --sample COUNT --seed S \
             or raise {BUDGET_VAR}",
            size.map_or_else(|| "too many".to_string(), |s| s.to_string())
        )),
    }
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("value serializes")
    );
}

fn cmd_select(args: SelectArgs) -> Result<ExitCode, String> {
    let mechanism = args.mechanism.build(args.k)?;
    let input = fs::read_to_string(&args.input)
        .map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let g = Digraph::parse(&input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let selected = run(mechanism, &g).map_err(|e| e.to_string())?;
    let gaps: Vec<(Aggregator, Rational)> = Aggregator::ALL
        .iter()
        .map(|&sigma| additive_gap(&g, &selected, sigma).map(|gap| (sigma, gap)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let indegree = |v| g.indegrees()[v - 1];

    if args.json {
        let members: Vec<Value> = selected
            .iter()
            .map(|v| json!({"vertex": v, "indegree": indegree(v)}))
            .collect();
        let gaps: serde_json::Map<String, Value> = gaps
            .iter()
            .map(|&(sigma, gap)| (sigma.name().to_string(), rational_json(gap)))
            .collect();
        print_json(&json!({
            "mechanism": mechanism,
            "graph": g,
            "selected": selected,
            "members": members,
            "max_indegree": g.max_indegree(),
            "gaps": gaps,
        }));
    } else {
        println!("mechanism: {mechanism}");
        println!("selected: {selected}");
        for v in selected.iter() {
            println!("  vertex {v}: indegree {}", indegree(v));
        }
        println!("max indegree: {}", g.max_indegree());
        for (sigma, gap) in gaps {
            println!("{sigma} gap: {}", Exact(gap));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let mechanism = args.mechanism.build(args.k)?;
    let spec = class_spec(&args.class)?;
    impartial_core::verify::check_domain(mechanism, spec).map_err(|e| e.to_string())?;
    let config = SweepConfig {
        impartiality: true,
        deviation_bound: spec.d(),
        objective: Some(args.objective),
    };
    let (mode, report): (Value, VerificationReport) = match (args.sample, args.seed) {
        (Some(count), Some(seed)) => {
            let report = sweep(&mechanism, sample_class(spec, count, seed), config);
            (
                json!({"sample": count, "seed": seed}),
                report.map_err(|e| e.to_string())?,
            )
        }
        _ => {
            check_budget(spec)?;
            let report = sweep(&mechanism, spec.enumerate(), config);
            (json!("exhaustive"), report.map_err(|e| e.to_string())?)
        }
    };
    let within = report.worst_gap.is_none_or(|gap| gap <= args.alpha);
    let passed = report.is_impartial() && within;

    if args.json {
        print_json(&json!({
            "mechanism": mechanism,
            "class": spec.to_string(),
            "mode": mode,
            "alpha": rational_json(args.alpha),
            "passed": passed,
            "report": report,
        }));
    } else {
        println!("mechanism: {mechanism}");
        match (args.sample, args.seed) {
            (Some(count), Some(seed)) => println!("class: {spec} ({count} samples, seed {seed})"),
            _ => println!("class: {spec} (exhaustive)"),
        }
        println!("graphs checked: {}", report.graphs_checked);
        println!("deviations checked: {}", report.deviations_checked);
        println!(
            "impartiality violations: {}",
            report.impartiality_violations.len()
        );
        if let Some(v) = report.impartiality_violations.first() {
            println!(
                "  first: vertex {} in {} vs {}",
                v.vertex,
                v.graph.to_json(),
                v.deviation.to_json()
            );
        }
        if let (Some(gap), Some(witness)) = (report.worst_gap, &report.worst_gap_witness) {
            println!(
                "worst {} gap: {} on {}",
                args.objective,
                Exact(gap),
                witness.to_json()
            );
        }
        println!(
            "selection size: {}..={}",
            report.min_selection_size, report.max_selection_size
        );
        println!("threshold: {}", Exact(args.alpha));
        println!("result: {}", if passed { "verified" } else { "FAILED" });
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn build_family(args: &GadgetArgs) -> Result<GadgetFamily, String> {
    let family = match args.family {
        Family::Cycle => {
            if args.d.is_some_and(|d| d != 1) {
                return Err("the cycle family lives in the outdegree-1 class; drop --d".into());
            }
            build_cycle_family(args.n.unwrap_or(3))
        }
        Family::Kfam => {
            let n = args.n.ok_or("--family kfam needs --n")?;
            let d = args.d.ok_or("--family kfam needs --d")?;
            build_k_family(n, d)
        }
        Family::Fig4 => {
            if args.n.is_some_and(|n| n != 4) || args.d.is_some_and(|d| d != 3) {
                return Err("the fig4 family is fixed at n = 4, d = 3".into());
            }
            build_two_path_orbit()
        }
    };
    family.map_err(|e| e.to_string())
}

fn cmd_gadget(args: GadgetArgs) -> Result<ExitCode, String> {
    let family = build_family(&args)?;
    let labels: Vec<String> = family.graphs().iter().map(|g| g.label.clone()).collect();
    let query = ImpossibilityQuery::new(family, args.objective, args.alpha, args.k)
        .map_err(|e| e.to_string())?;
    let outcome = verify_impossibility(&query).map_err(|e| e.to_string())?;

    if args.json {
        print_json(&json!({
            "family": query.family,
            "objective": args.objective,
            "alpha": rational_json(args.alpha),
            "k": args.k,
            "outcome": outcome,
        }));
    } else {
        println!(
            "family: {} graphs, {} links on {} vertices",
            query.family.len(),
            query.family.links().len(),
            query.family.n()
        );
        println!(
            "query: {} gap <= {}, k = {}",
            args.objective,
            Exact(args.alpha),
            args.k
        );
        match &outcome {
            ImpossibilityOutcome::Unsat { trace } => {
                println!(
                    "UNSAT: no impartial {}-selection mechanism meets this guarantee on any class containing the family",
                    args.k
                );
                println!(
                    "search: {} nodes, {} wipeouts, {} backtracks",
                    trace.stats.nodes, trace.stats.wipeouts, trace.stats.backtracks
                );
            }
            ImpossibilityOutcome::Sat { assignment, .. } => {
                println!("SAT: the family admits a consistent assignment (this does not show a mechanism exists)");
                for (label, selection) in labels.iter().zip(assignment.selections()) {
                    println!("  {label}: {selection}");
                }
            }
        }
    }
    Ok(if outcome.is_unsat() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_enumerate(args: ClassArgs) -> Result<ExitCode, String> {
    use std::io::Write;

    let spec = class_spec(&args)?;
    check_budget(spec)?;
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    for g in spec.enumerate() {
        if writeln!(out, "{}", g.to_json()).is_err() {
            // Closed pipe, e.g. `| head`.
            return Ok(ExitCode::SUCCESS);
        }
    }
    let _ = out.flush();
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Select(args) => cmd_select(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Gadget(args) => cmd_gadget(args),
        Command::Enumerate(args) => cmd_enumerate(args),
    };
    result.unwrap_or_else(|message| {
        eprintln!("error: {message}");
        ExitCode::from(2)
    })
}
