use std::process::ExitCode;

fn main() -> ExitCode {
    orgsearch::cli::main_with_args(std::env::args_os())
}
