fn main() -> std::process::ExitCode {
    dagot::cli::main()
}
