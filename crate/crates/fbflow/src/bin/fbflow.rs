fn main() {
    std::process::exit(fbflow::cli::run(std::env::args_os()));
}
