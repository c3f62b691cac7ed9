fn main() -> std::process::ExitCode {
    parseval::cli::main()
}
