fn main() {
    std::process::exit(newtonlk::cli::run(std::env::args_os()));
}
