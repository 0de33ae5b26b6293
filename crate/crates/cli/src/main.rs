fn main() {
    std::process::exit(isbjssp_cli::cli::run(std::env::args_os()));
}
