fn main() {
    std::process::exit(latticeprobe::cli::main_with_args(std::env::args_os()));
}
