fn main() {
    std::process::exit(tubeforge::cli::run(std::env::args_os()));
}
