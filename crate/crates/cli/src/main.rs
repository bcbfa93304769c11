use std::process::ExitCode;

fn main() -> ExitCode {
    dtbench::cli::main_impl()
}
