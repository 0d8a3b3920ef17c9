//! `fleetcharge`: command-line client for the scheduling service. Without
//! `--server` it starts a private server on a loopback port for the
//! duration of the command.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fleetcharge_client::Client;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "fleetcharge",
    version,
    about = "Online charge scheduling for electric ride-hailing fleets"
)]
struct Cli {
    /// Base URL of a running server; omit to use an embedded one.
    #[arg(long, global = true, env = "FLEETCHARGE_SERVER")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Generate a seeded instance and write config.json and sessions.csv.
    Generate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the online dispatcher; writes report.json and decisions.csv.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a threshold baseline; writes report.json and decisions.csv.
    RunBaseline {
        #[command(flatten)]
        source: Source,
        /// SoC threshold as a fraction (0.25) or percent (25).
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Capacity-relaxed upper bound on welfare.
    OfflineUb {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive offline optimum; only for tiny instances.
    OfflineExact {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Allocation-payment and invariant checks. Exits 2 when a check fails.
    Verify {
        #[command(flatten)]
        source: Source,
        /// dapr, invariants or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        grid_points: usize,
        /// Restrict the allocation-payment check to one resource family.
        #[arg(long)]
        family: Option<String>,
        /// Override every family's ratio.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate reports from one instance against the upper bound.
    Compare {
        /// Report JSON files written by `run` or `run-baseline`.
        #[arg(long, required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
        /// A number, or a JSON file written by `offline-ub`.
        #[arg(long)]
        upper_bound: String,
        /// A number, or a JSON file written by `offline-exact`.
        #[arg(long)]
        optimum: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeded days in parallel and compare every algorithm.
    Experiment {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "desk")]
        preset: String,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        /// Also compute the exhaustive optimum (tiny presets only).
        #[arg(long)]
        exact: bool,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Where an instance comes from: files, or a seed and preset.
#[derive(Args, Clone)]
struct Source {
    /// Scenario config JSON (or an instance JSON with `config` and `sessions`).
    #[arg(long, conflicts_with = "seed")]
    config: Option<PathBuf>,
    /// Session stream, CSV or JSON.
    #[arg(long, requires = "config")]
    sessions: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// desk, city or tiny.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// Grid price trace CSV replacing the config's prices.
    #[arg(long)]
    prices: Option<PathBuf>,
    /// Solar trace CSV replacing the config's solar.
    #[arg(long)]
    solar: Option<PathBuf>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::FAILURE;
        }
    };
    match runtime.block_on(dispatch(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

async fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Command::Serve { addr } = cli.command {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        fleetcharge_server::serve(listener).await?;
        return Ok(ExitCode::SUCCESS);
    }
    let (client, embedded) = match cli.server {
        Some(url) => (Client::new(url), None),
        None => {
            let server = fleetcharge_server::spawn_local().await?;
            (Client::new(server.url()), Some(server))
        }
    };
    let result = commands::execute(&client, cli.command).await;
    if let Some(server) = embedded {
        server.stop().await?;
    }
    result
}
