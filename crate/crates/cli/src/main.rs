use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use fedabc_cli::commands;
use fedabc_cli::config::{ExperimentConfig, TransportKind};

#[derive(Parser)]
#[command(name = "fedabc", version, about = "Federated ABC-GMM oversampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multi-site dataset.
    GenData(Common),
    /// Filter, partition, split and standardize the dataset.
    Prepare(Common),
    /// Train site encoders, run federated inference and evaluate.
    Run(RunArgs),
    /// Aggregate report.json files from one or more runs.
    Report {
        /// Run directories or report.json files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Also write summary.txt and summary.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    transport: Option<TransportKind>,
    /// Address the TCP hub binds.
    #[arg(long)]
    listen: Option<String>,
    /// Address sites dial (defaults to the hub's bound address).
    #[arg(long)]
    connect: Option<String>,
    /// Bypass the transport and run rejection on pooled encodings.
    #[arg(long)]
    centralized: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::GenData(c) => {
            let path = commands::cmd_gen_data(&c.resolve()?)?;
            println!("{}", path.display());
            Ok(0)
        }
        Command::Prepare(c) => {
            let dir = commands::cmd_prepare(&c.resolve()?)?;
            println!("{}", dir.display());
            Ok(0)
        }
        Command::Run(r) => {
            let mut cfg = r.common.resolve()?;
            let f = &mut cfg.federation;
            if let Some(t) = r.transport {
                f.transport = t;
            }
            if let Some(l) = r.listen {
                f.listen = l;
            }
            if r.connect.is_some() {
                f.connect = r.connect;
            }
            f.centralized |= r.centralized;
            let outcome = commands::cmd_run(&cfg)?;
            print!("{}", outcome.report_text);
            Ok(outcome.exit_code)
        }
        Command::Report { paths, out_dir } => {
            let summary = commands::cmd_report(&paths, out_dir.as_deref())?;
            print!("{}", summary.render_text());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
