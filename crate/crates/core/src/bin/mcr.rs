fn main() -> std::process::ExitCode {
    mcr_balance::cli::main()
}
