use clap::Parser;

fn main() {
    let cli = revivals_cli::Cli::parse();
    std::process::exit(revivals_cli::run(&cli));
}
