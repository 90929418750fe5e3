fn main() {
    std::process::exit(sdrme::cli::main_with_args(std::env::args_os()));
}
