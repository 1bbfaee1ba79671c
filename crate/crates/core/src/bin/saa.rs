fn main() {
    std::process::exit(saa::cli::run(std::env::args_os()));
}
