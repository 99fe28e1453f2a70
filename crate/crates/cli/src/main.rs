mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, GraphCommand, TabularCommand, TsCommand};

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help/--version
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_env("HNN_LOG").target(env_logger::Target::Stderr).init();

    let result = match &cli.command {
        Command::Graph(GraphCommand::Build(a)) => commands::graph_build(a),
        Command::Tabular(TabularCommand::Train(a)) => commands::tabular_train(a),
        Command::Tabular(TabularCommand::Eval(a)) => commands::tabular_eval(a),
        Command::Ts(TsCommand::Train(a)) => commands::ts_train(a),
        Command::Ts(TsCommand::Eval(a)) => commands::ts_eval(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(1)
        }
    }
}
