fn main() {
    std::process::exit(padic_fg::cli::run(std::env::args_os()));
}
