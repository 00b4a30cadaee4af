fn main() {
    std::process::exit(marvist::cli::main_with(std::env::args_os()));
}
