use clap::Parser;

fn main() {
    let cli = foliate_cli::Cli::parse();
    std::process::exit(foliate_cli::execute(&cli));
}
