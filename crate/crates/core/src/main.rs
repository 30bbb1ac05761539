use std::process::ExitCode;

fn main() -> ExitCode {
    pbs_core::cli::main()
}
