use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use microgrid::config::{parse_config, Overrides};
use microgrid::engine::run_batch;
use microgrid::ingest::{load_table_path, synth};
use microgrid::report;
use microgrid::ScenarioKind;

#[derive(Parser)]
#[command(name = "microgrid", version, about = "Microgrid energy trading and sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario comparisons and write reports.
    Simulate(Box<SimulateArgs>),
    /// Write a synthetic hourly demand/generation/price CSV.
    SynthTable {
        #[arg(long, default_value_t = synth::HOURS_PER_YEAR)]
        hours: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Flat key/value config file (TOML, or a JSON run manifest).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hourly CSV with 'generation solar', 'total load actual', 'price actual'.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Scenario to run; repeat for several.
    #[arg(long = "scenario")]
    scenarios: Vec<ScenarioKind>,
    /// Seed for house synthesis; repeat for a batch.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Calibrate total generation / total load to this ratio; repeatable.
    #[arg(long = "target-gen-ratio")]
    targets: Vec<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    fee: Option<f64>,
    #[arg(long)]
    houses: Option<usize>,
    #[arg(long)]
    pr: Option<f64>,
    #[arg(long)]
    balance: Option<f64>,
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let overrides = Overrides {
        eta: args.eta,
        tau: args.tau,
        fee_rate: args.fee,
        initial_balance: args.balance,
        n_houses: args.houses,
        pr: args.pr,
        horizon: args.horizon,
        input: args.input,
        output: args.out,
        scenarios: args.scenarios,
        seeds: args.seeds,
        targets: args.targets,
    };
    let cfg = parse_config(args.config.as_deref(), &overrides)?;
    let table = load_table_path(&cfg.input).with_context(|| format!("reading {}", cfg.input.display()))?;
    let batch = run_batch(&table, &cfg.sim, &cfg.scenarios, &cfg.seeds, &cfg.targets)?;
    print!("{}", report::render_text(&batch));
    for path in report::write_reports(&cfg, &batch)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(*args),
        Command::SynthTable { hours, seed, out } => (|| {
            let table = synth::synthetic_table(hours, seed);
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            table.write_csv(BufWriter::new(file))?;
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
