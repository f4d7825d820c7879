fn main() {
    std::process::exit(taylor_lcu::cli::main_with_args(std::env::args_os()));
}
