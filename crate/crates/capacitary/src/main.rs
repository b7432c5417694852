fn main() {
    std::process::exit(capacitary::cli::run(std::env::args_os()));
}
