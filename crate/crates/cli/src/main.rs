fn main() {
    std::process::exit(ionfluor_cli::main_with_args(std::env::args_os()));
}
