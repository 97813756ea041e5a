fn main() {
    std::process::exit(eigenbound::cli::main_with_args(std::env::args_os()));
}
