fn main() {
    std::process::exit(spaghetti_cli::main_with_args(std::env::args_os()));
}
