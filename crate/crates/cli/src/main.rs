use clap::Parser;

fn main() {
    let cli = fdf_cli::Cli::parse();
    fdf_cli::init_logging(&cli.log);
    if let Err(e) = fdf_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
