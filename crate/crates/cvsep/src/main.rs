fn main() -> std::process::ExitCode {
    cvsep::cli::main()
}
