fn main() {
    std::process::exit(lucas_modes::cli::run(std::env::args_os()));
}
