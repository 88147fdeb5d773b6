use clap::Parser;

fn main() {
    let cli = ratconj::cli::Cli::parse();
    std::process::exit(ratconj::cli::run(cli));
}
