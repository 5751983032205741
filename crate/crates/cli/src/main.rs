use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(entromodem_cli::run(std::env::args_os()))
}
