fn main() {
    std::process::exit(fpl2::cli::run(std::env::args_os()));
}
