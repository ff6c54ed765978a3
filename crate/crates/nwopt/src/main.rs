use clap::Parser;

use nwopt::cli;

fn main() {
    let args = cli::Cli::parse();
    let mut stdout = std::io::stdout();
    std::process::exit(cli::run(&args, &mut stdout));
}
