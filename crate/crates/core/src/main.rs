fn main() {
    std::process::exit(hexsolve::cli::main_with(std::env::args_os()));
}
