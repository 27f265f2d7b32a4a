//! `cwim`: generate graphs, run bandit experiments, aggregate and report.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cwim::graph::gen_erdos_renyi;
use cwim::harness::{
    aggregate_dir, prepare_out_dir, read_aggregate_csv, render_report, run_experiment,
    write_aggregate_csv, write_experiment, ExperimentConfig,
};
use cwim::Error;

#[derive(Parser)]
#[command(
    name = "cwim",
    version,
    about = "Corruption-robust online influence maximization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an Erdős–Rényi graph as an edge list.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p_edge: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output` key.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Reuse a non-empty output directory.
        #[arg(long)]
        force: bool,
        /// Worker threads.
        #[arg(long, env = "CWIM_JOBS")]
        jobs: Option<usize>,
    },
    /// Recompute aggregate.csv from an experiment directory's run files.
    Aggregate {
        #[arg(long)]
        in_dir: PathBuf,
        /// Defaults to `<in-dir>/aggregate.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise an aggregate.csv as a text table.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Prints to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::GenGraph {
            n,
            p_edge,
            seed,
            out,
        } => {
            let g = gen_erdos_renyi(n, p_edge, seed)?;
            g.write_edge_list(&out)?;
            eprintln!(
                "wrote {} nodes, {} edges to {}",
                g.node_count(),
                g.edge_count(),
                out.display()
            );
        }
        Command::Run {
            config,
            out_dir,
            force,
            jobs,
        } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let out_dir = out_dir
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| Error::Config("no --out-dir and no `output` key".into()))?;
            if jobs == Some(0) {
                return Err(Error::Config("--jobs must be at least 1".into()));
            }
            let jobs =
                jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            prepare_out_dir(&out_dir, force)?;
            let result = run_experiment(&cfg, jobs)?;
            write_experiment(&out_dir, &result)?;
            let rows = read_aggregate_csv(&out_dir.join("aggregate.csv"))?;
            print!("{}", render_report(&rows)?);
        }
        Command::Aggregate { in_dir, out } => {
            let rows = aggregate_dir(&in_dir)?;
            let out = out.unwrap_or_else(|| in_dir.join("aggregate.csv"));
            write_aggregate_csv(&out, &rows)?;
        }
        Command::Report { input, out } => {
            let text = render_report(&read_aggregate_csv(&input)?)?;
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
