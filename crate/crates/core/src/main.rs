use clap::Parser;

fn main() {
    let cli = smartbeam::cli::Cli::parse();
    std::process::exit(smartbeam::cli::run(cli));
}
