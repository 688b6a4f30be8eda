fn main() -> std::process::ExitCode {
    ellipsoid_vc::cli::main()
}
