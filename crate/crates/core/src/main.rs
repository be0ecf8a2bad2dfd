fn main() {
    std::process::exit(msbl::cli::main_with_args(std::env::args_os()));
}
