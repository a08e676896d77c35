use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "fdf", version, about = "Bus seat occupancy: datacenter service, fleet simulator, detection tools")]
pub struct Cli {
    /// Log filter, e.g. `info` or `fdf_datacenter=debug`.
    #[arg(long, global = true, env = "FDF_LOG", default_value = "info")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the datacenter HTTP API with a route network pre-registered.
    Serve(ServeArgs),
    /// Run a fleet scenario (or an occupancy sweep) and write its trace and detection report.
    Simulate(SimulateArgs),
    /// Count occupied seats in a directory of PGM frames from one bus.
    Detect(DetectArgs),
    /// Score per-frame counts against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Route network JSON: stops, routes and optionally buses.
    #[arg(long)]
    pub routes: PathBuf,
    #[arg(long, env = "FDF_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Keep event logs here and replay them on start; in-memory when absent.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON, or sweep JSON with `--sweep`.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seat_map: PathBuf,
    /// Treat the scenario file as an occupancy sweep; only report.csv is written.
    #[arg(long)]
    pub sweep: bool,
    /// Use a private in-memory datacenter instead of a running service.
    #[arg(long)]
    pub in_process: bool,
    /// Address of a running service.
    #[arg(long, env = "FDF_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Output directory for trace.jsonl and report.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write every frame and a truth.csv per bus under this directory.
    #[arg(long)]
    pub frames: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Directory of `<bus>_<timestamp>.pgm` frames; the earliest shows the empty cabin.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub seat_map: PathBuf,
    /// Detector settings JSON; defaults to the streaming configuration.
    #[arg(long)]
    pub vision: Option<PathBuf>,
    /// CSV with columns timestamp,occupied,empty,total.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with columns timestamp,occupied.
    #[arg(long)]
    pub truth: PathBuf,
    /// CSV as written by `detect`.
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
