fn main() {
    std::process::exit(regobs::cli::main_with_args(std::env::args_os()));
}
