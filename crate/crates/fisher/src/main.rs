fn main() {
    std::process::exit(fisher::cli::run(std::env::args_os()));
}
