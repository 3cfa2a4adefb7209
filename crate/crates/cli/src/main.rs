use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ticket_router::pipeline::{self, PipelineConfig};

/// Route incident tickets across expert groups with learned rankers.
#[derive(Parser, Debug)]
#[command(name = "ticket-router", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Options {
    /// JSON pipeline configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// generator seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// root-level neighbours added to each candidate set
    #[arg(long, global = true)]
    neighbors: Option<usize>,
    /// active feature blocks, e.g. "T,G,TG,GG"
    #[arg(long, global = true)]
    blocks: Option<String>,
    #[arg(long, global = true)]
    split_seed: Option<u64>,
    #[arg(long, global = true)]
    train_seed: Option<u64>,
    #[arg(long, global = true)]
    work_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the synthetic corpus into <work-dir>/data
    GenData,
    /// Split the corpus and build networks, text models and features
    Build,
    /// Train the pointwise and pairwise rankers
    Train,
    /// Simulate routing on every test set
    Evaluate,
    /// Retrain the pairwise ranker without each feature block
    Ablate,
    /// Write the consolidated summary
    Report,
    /// Run every stage in order
    All,
}

fn config(o: &Options) -> Result<PipelineConfig> {
    let mut cfg = match &o.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.neighbors {
        cfg.neighbors = v;
    }
    if let Some(v) = &o.blocks {
        cfg.blocks = v.clone();
    }
    if let Some(v) = o.split_seed {
        cfg.split_seed = v;
    }
    if let Some(v) = o.train_seed {
        cfg.train_seed = v;
    }
    if let Some(v) = &o.work_dir {
        cfg.work_dir = v.clone();
    }
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(&cli.opts)?;
    match cli.command {
        Command::GenData => {
            let c = pipeline::gen_data(&cfg)?;
            println!("wrote {} tickets to {}", c.tickets().len(), cfg.paths().corpus.tickets.display());
        }
        Command::Build => {
            let s = pipeline::build(&cfg)?;
            println!(
                "train {} / test {} tickets, {} training instances",
                s.train_tickets, s.test_tickets, s.training_instances
            );
        }
        Command::Train => {
            let m = pipeline::train(&cfg)?;
            println!(
                "pointwise: {} trees, pairwise: {} rounds",
                m.pointwise.trees.len(),
                m.pairwise.metadata.rounds_run
            );
        }
        Command::Evaluate => {
            let e = pipeline::evaluate(&cfg)?;
            for r in &e.reports.reports {
                println!("{:<4} {:<10} MSTR {:.3}  RR(10) {:.3}", r.test_set, r.system, r.mstr, r.rr[9]);
            }
        }
        Command::Ablate => {
            for row in pipeline::ablate(&cfg)? {
                let hr: Vec<String> = row.hit_rates.iter().map(|(s, h)| format!("{s} {:.3}", h[0])).collect();
                println!("-{:<4} HR@1 {}", row.removed.map_or("none", |b| b.name()), hr.join("  "));
            }
        }
        Command::Report => {
            pipeline::report(&cfg)?;
            println!("wrote {}", cfg.paths().reports.join("summary.json").display());
        }
        Command::All => {
            pipeline::run_all(&cfg)?;
            println!("wrote {}", cfg.paths().reports.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
