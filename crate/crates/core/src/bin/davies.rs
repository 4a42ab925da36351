fn main() {
    std::process::exit(davies::cli::run(std::env::args_os()));
}
