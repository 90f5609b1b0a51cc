fn main() {
    std::process::exit(qrepeater::cli::run(std::env::args_os()));
}
