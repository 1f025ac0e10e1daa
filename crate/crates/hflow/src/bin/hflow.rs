fn main() {
    std::process::exit(hflow::cli::run(std::env::args_os()));
}
