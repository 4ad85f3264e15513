fn main() {
    std::process::exit(ocrforge::cli::main_with_args(std::env::args_os()));
}
