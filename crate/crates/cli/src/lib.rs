//! The `fdf` command: serve the datacenter API, run fleet scenarios, count
//! seats in recorded frames, and score counts against ground truth.

mod args;
mod detect;
mod eval;
mod http_sink;
mod serve;
mod simulate;

pub use args::{Cli, Command, DetectArgs, EvalArgs, ServeArgs, SimulateArgs};
pub use http_sink::HttpSink;

/// Failures split by who has to act: bad input exits 2, everything else 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0:#}")]
    Input(anyhow::Error),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub(crate) trait Classify<T> {
    fn input(self) -> Result<T, CliError>;
    fn runtime(self) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Input(e.into()))
    }

    fn runtime(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime(e.into()))
    }
}

pub fn init_logging(filter: &str) {
    let filter = tracing_subscriber::EnvFilter::try_new(filter).unwrap_or_else(|_| "info".into());
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Serve(a) => serve::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Detect(a) => detect::run(a),
        Command::Eval(a) => eval::run(a),
    }
}
