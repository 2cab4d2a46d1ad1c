fn main() {
    std::process::exit(kinetic_flows::cli::main_with_args(std::env::args_os()));
}
