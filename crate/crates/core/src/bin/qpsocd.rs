fn main() {
    std::process::exit(qpsocd::cli::run_from_args(std::env::args_os()));
}
