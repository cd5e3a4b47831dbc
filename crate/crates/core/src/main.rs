fn main() {
    std::process::exit(cclab::cli::run_from(std::env::args_os()));
}
