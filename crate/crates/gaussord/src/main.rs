fn main() {
    std::process::exit(gaussord::cli::run(std::env::args_os()));
}
