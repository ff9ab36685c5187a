fn main() {
    std::process::exit(transfield::cli::run(std::env::args_os()));
}
