fn main() {
    std::process::exit(tabreg::cli::run(std::env::args_os()));
}
