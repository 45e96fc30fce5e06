fn main() {
    std::process::exit(spatium::cli::run(std::env::args_os()));
}
