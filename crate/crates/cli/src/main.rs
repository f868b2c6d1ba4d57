use clap::Parser;
use cornershuffle_cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = cornershuffle_cli::CliError::Config(e.to_string());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    let status = match cli.into_config() {
        Ok(config) => run(&config),
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    };
    std::process::exit(status);
}
