fn main() {
    std::process::exit(topocl::cli::main_with_args(std::env::args_os()));
}
