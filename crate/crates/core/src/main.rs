use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(entropy_games::cli::run(std::env::args_os()))
}
