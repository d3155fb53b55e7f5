fn main() {
    std::process::exit(nsl_cli::run_from_env());
}
