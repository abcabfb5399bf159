fn main() {
    std::process::exit(ncball::cli::run(std::env::args_os()));
}
