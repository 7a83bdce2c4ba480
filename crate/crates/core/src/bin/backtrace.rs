fn main() {
    std::process::exit(invlaw::cli::main_with_args(std::env::args_os()));
}
