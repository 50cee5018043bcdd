fn main() {
    std::process::exit(sparsead::bench_cli::main_with_args(std::env::args_os()));
}
