fn main() {
    std::process::exit(degenbif::cli::run(std::env::args_os()));
}
