fn main() -> std::process::ExitCode {
    entscope::cli::main()
}
