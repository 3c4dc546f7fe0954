fn main() -> std::process::ExitCode {
    logpareto::cli::main()
}
