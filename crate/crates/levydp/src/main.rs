fn main() {
    std::process::exit(levydp::cli::run());
}
