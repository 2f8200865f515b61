fn main() {
    std::process::exit(quatforms::cli::run(std::env::args_os()));
}
