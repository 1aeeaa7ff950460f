mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pks_core::path_measure::DEFAULT_THRESHOLD;
use pks_core::zero_explorer::{SearchStrategy, DEFAULT_NODE_BUDGET};
use report::Format;

/// Verifications, table reproductions and zero-event scans for the
/// Peres-Kochen-Specker system in quantum measure theory.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on a
/// usage or input error.
#[derive(Parser)]
#[command(name = "pks-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Norm below which an event counts as null.
    #[arg(long, global = true, default_value_t = DEFAULT_THRESHOLD, value_parser = positive_float)]
    threshold: f64,
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Rays, types, bases, orthogonal pairs and the symmetry group.
    Geometry,
    /// Non-colourability certificate and the forcing walkthrough.
    KsVerify,
    /// Valuation table of the two-point co-event phi_M.
    PhiM,
    /// Decoherence-functional axioms, sum rule and PKS nullity for one context.
    MeasureCheck {
        #[command(flatten)]
        context: ContextArgs,
        /// Event pairs sampled for Hermiticity and positivity.
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        /// Disjoint triples sampled for additivity and the sum rule.
        #[arg(long, default_value_t = 1000)]
        triples: usize,
    },
    /// Exhaustive zero-event scan and phi_M coverage verdict for one context.
    ZeroScan {
        #[command(flatten)]
        context: ContextArgs,
        /// Largest number of fixed rays in a scanned event.
        #[arg(long, default_value_t = 3)]
        max_fixed: usize,
        /// Node budget for the scan walker.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// List every zero event found.
        #[arg(long)]
        records: bool,
    },
    /// Randomised checks that primitive preclusive co-events of classical
    /// measures are homomorphisms.
    LemmaFuzz {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Largest sample-space size.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..=12))]
        max_n: u64,
    },
    /// Ranked search over orderings and states for contexts where phi_M
    /// might stay preclusive.
    Search {
        /// Number of contexts evaluated, the 021-last reference included.
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value = "mixed", value_parser = parse_strategy)]
        strategy: SearchStrategy,
        #[arg(long, default_value_t = 3)]
        max_fixed: usize,
    },
}

#[derive(Args)]
struct ContextArgs {
    /// Ray ordering: one label per line, or a JSON array of labels.
    /// Defaults to table order.
    #[arg(long, value_name = "PATH")]
    ordering: Option<PathBuf>,
    /// Initial state as JSON, {"pure": ...} or {"mixed": ...}. Defaults to |0,z>.
    #[arg(long, value_name = "PATH")]
    state: Option<PathBuf>,
    /// Insert a which-colour detector after this ray. Repeatable.
    #[arg(long, value_name = "RAY")]
    detector: Vec<String>,
}

fn positive_float(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_strategy(s: &str) -> Result<SearchStrategy, String> {
    s.parse().map_err(|e: pks_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = commands::Globals { threshold: cli.threshold, seed: cli.seed };
    let outcome = match cli.command {
        Command::Geometry => Ok(commands::geometry()),
        Command::KsVerify => commands::ks_verify(),
        Command::PhiM => Ok(commands::phi_m()),
        Command::MeasureCheck { context, pairs, triples } => {
            commands::load_context(&context.ordering, &context.state, &context.detector)
                .and_then(|ctx| commands::measure_check(&opts, ctx, pairs, triples))
        }
        Command::ZeroScan { context, max_fixed, budget, records } => {
            commands::load_context(&context.ordering, &context.state, &context.detector)
                .and_then(|ctx| commands::zero_scan(&opts, ctx, max_fixed, budget, records))
        }
        Command::LemmaFuzz { trials, max_n } => commands::lemma_fuzz(&opts, trials as usize, max_n as usize),
        Command::Search { budget, strategy, max_fixed } => commands::search(&opts, budget, strategy, max_fixed),
    };
    match outcome {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(failure) => {
            eprintln!("pks-lab: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
