use clap::Parser;

fn main() {
    let cli = adaptsync::commands::Cli::parse();
    std::process::exit(adaptsync::commands::execute(cli));
}
