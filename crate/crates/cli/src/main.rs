fn main() {
    std::process::exit(lattice_kernel_cli::main_with_args(std::env::args_os()));
}
