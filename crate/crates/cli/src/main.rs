fn main() -> std::process::ExitCode {
    carvesim_cli::main_with_args(std::env::args_os())
}
