fn main() {
    std::process::exit(hypolab::cli::main_with_args(std::env::args_os()));
}
