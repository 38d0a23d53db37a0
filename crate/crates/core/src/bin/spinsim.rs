fn main() {
    std::process::exit(spinsim::cli::main_with_args(std::env::args_os()));
}
