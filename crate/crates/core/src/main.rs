fn main() {
    std::process::exit(robustcs::cli::run_cli(std::env::args_os()));
}
