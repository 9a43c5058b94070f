fn main() {
    std::process::exit(slrt::cli::run_command(std::env::args().skip(1).collect()));
}
