mod classify;
mod input;
mod market;
mod output;
mod select;
mod value;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Report;

/// Value of information, substitutes and complements, signal selection and
/// market-scoring-rule games on finite Bayesian structures.
#[derive(Parser, Debug)]
#[command(name = "infosubs", version, about)]
struct Cli {
    /// Emit JSON instead of a human-readable report.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true, env = "INFOSUBS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value of subsets of signals, exactly or by sampling.
    Value(value::Args),
    /// Classify signals as substitutes or complements, or run a structural test.
    Classify(classify::Args),
    /// Choose signals under a cardinality, knapsack or family constraint.
    Select(select::Args),
    /// Adaptive greedy signal acquisition.
    Adaptive(select::AdaptiveArgs),
    /// Build a signal-selection instance whose value function is a given set function.
    Reduce(select::ReduceArgs),
    /// Run or verify a market-scoring-rule game.
    Market(market::Args),
    /// List built-in fixtures and rules, or print one fixture as JSON.
    Fixtures(input::FixturesArgs),
}

fn run(cli: Cli) -> anyhow::Result<Report> {
    match cli.command {
        Command::Value(a) => value::run(a),
        Command::Classify(a) => classify::run(a),
        Command::Select(a) => select::run(a),
        Command::Adaptive(a) => select::run_adaptive(a),
        Command::Reduce(a) => select::run_reduce(a),
        Command::Market(a) => market::run(a),
        Command::Fixtures(a) => input::run_fixtures(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let json = cli.json;
    match run(cli) {
        Ok(report) => report.emit(json),
        Err(e) => {
            if json {
                println!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
