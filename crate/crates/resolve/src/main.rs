fn main() {
    std::process::exit(resolve::cli::run(std::env::args_os()));
}
