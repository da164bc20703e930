fn main() {
    std::process::exit(stablevar::cli::run(std::env::args_os()));
}
