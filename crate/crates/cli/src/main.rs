fn main() {
    std::process::exit(varilab_cli::main_with_args(std::env::args_os()));
}
