fn main() {
    std::process::exit(infpush::cli::run(std::env::args_os()));
}
