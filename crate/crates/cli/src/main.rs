use clap::Parser;

fn main() {
    let cli = gestalt_cli::Cli::parse();
    if let Err(e) = gestalt_cli::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
