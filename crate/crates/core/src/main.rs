fn main() {
    std::process::exit(cmising::cli::run(std::env::args_os()));
}
