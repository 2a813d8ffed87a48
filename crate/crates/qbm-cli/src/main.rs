use clap::Parser;

fn main() {
    let cli = qbm_cli::cli::Cli::parse();
    std::process::exit(qbm_cli::run(cli));
}
