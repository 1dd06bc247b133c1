use std::process::ExitCode;

fn main() -> ExitCode {
    subsonic_cli::run(std::env::args_os())
}
