fn main() {
    std::process::exit(qavcap::cli::run(std::env::args_os()));
}
