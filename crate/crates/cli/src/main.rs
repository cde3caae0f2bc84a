fn main() {
    std::process::exit(comp2flex_cli::run(std::env::args_os()));
}
