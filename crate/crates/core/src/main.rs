fn main() {
    std::process::exit(symplane::cli::run(std::env::args_os()));
}
