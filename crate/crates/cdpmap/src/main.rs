fn main() {
    std::process::exit(cdpmap::cli::run(std::env::args_os()));
}
