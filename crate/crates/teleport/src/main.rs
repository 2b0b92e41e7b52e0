fn main() {
    std::process::exit(teleport::cli::main_with_args(std::env::args_os()));
}
