fn main() {
    std::process::exit(sar_cli::main_with(std::env::args_os()));
}
