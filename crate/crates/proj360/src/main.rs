fn main() -> std::process::ExitCode {
    proj360::cli::main()
}
