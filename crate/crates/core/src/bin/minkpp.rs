fn main() {
    std::process::exit(minkpp::cli::run(std::env::args_os()));
}
