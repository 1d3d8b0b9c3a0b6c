fn main() -> std::process::ExitCode {
    fluidsym_cli::main_exit()
}
