fn main() {
    std::process::exit(sumdec_cli::main_with_args(std::env::args_os().skip(1)));
}
