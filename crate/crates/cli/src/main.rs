fn main() {
    std::process::exit(snake_cli::main_with_args(std::env::args_os()));
}
