fn main() {
    std::process::exit(trsta::cli::run(std::env::args_os()));
}
