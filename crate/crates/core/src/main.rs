fn main() {
    std::process::exit(wsos::cli::run(std::env::args_os()));
}
