use std::process::ExitCode;

fn main() -> ExitCode {
    mine::cli::main()
}
