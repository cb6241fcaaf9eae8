fn main() {
    std::process::exit(softbend::cli::run(std::env::args_os()));
}
