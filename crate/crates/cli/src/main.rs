fn main() -> std::process::ExitCode {
    stochsplit::cli::main()
}
