fn main() {
    std::process::exit(trap_tail::cli::main_with_args(std::env::args_os()));
}
