fn main() {
    std::process::exit(roughkit::cli::run(std::env::args_os()));
}
