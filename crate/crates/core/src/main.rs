fn main() {
    std::process::exit(apdiv::cli::run(std::env::args_os()));
}
