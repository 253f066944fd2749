fn main() {
    std::process::exit(pgnlab::cli::run(std::env::args()));
}
