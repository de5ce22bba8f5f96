fn main() {
    std::process::exit(hiersparse_cli::run(std::env::args_os()));
}
