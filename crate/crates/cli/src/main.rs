mod args;
mod commands;
mod error;
mod output;
mod svg;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Train(a) => commands::cmd_train(a),
        Command::Benchmark(a) => commands::cmd_benchmark(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Report(a) => commands::cmd_report(a),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
