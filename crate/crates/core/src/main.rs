use std::process::ExitCode;

fn main() -> ExitCode {
    scsvm::cli::main_with_args(std::env::args_os())
}
