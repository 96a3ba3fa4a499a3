fn main() {
    std::process::exit(pauseseg::cli::run_from(std::env::args_os()));
}
