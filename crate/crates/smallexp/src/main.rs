use clap::Parser;

fn main() {
    let cli = smallexp::cli::Cli::parse();
    std::process::exit(smallexp::cli::main_run(cli));
}
