fn main() {
    std::process::exit(relaybeam::cli::run_cli(std::env::args().skip(1)));
}
