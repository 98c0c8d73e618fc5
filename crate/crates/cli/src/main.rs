use clap::Parser;

fn main() {
    let cli = mpent_cli::config::Cli::parse();
    std::process::exit(mpent_cli::run(cli));
}
