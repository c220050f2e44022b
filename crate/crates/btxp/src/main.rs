fn main() -> std::process::ExitCode {
    btxp::cli::main()
}
