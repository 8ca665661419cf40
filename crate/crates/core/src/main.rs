fn main() {
    std::process::exit(optomagnon::cli::run());
}
