use std::process::ExitCode;

fn main() -> ExitCode {
    kplane::cli::main_entry()
}
