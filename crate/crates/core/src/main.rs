fn main() {
    std::process::exit(conduche::cli::run(std::env::args_os()));
}
