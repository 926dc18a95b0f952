fn main() {
    std::process::exit(msu::cli::run(std::env::args_os()));
}
