fn main() {
    std::process::exit(lorentz_twirl::cli::main_with_args(std::env::args_os()));
}
