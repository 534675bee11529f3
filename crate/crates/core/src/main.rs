fn main() {
    std::process::exit(sparsemode::cli::run(std::env::args_os()));
}
