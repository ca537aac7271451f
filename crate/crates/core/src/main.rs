fn main() {
    std::process::exit(robust_la::cli::main_with(std::env::args_os()));
}
