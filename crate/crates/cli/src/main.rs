use std::process::ExitCode;

fn main() -> ExitCode {
    unruh_lab::main_with_args(std::env::args_os())
}
