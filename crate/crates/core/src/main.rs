fn main() {
    std::process::exit(contstab::cli::run(std::env::args_os()));
}
