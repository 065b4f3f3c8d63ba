fn main() {
    std::process::exit(shadowrate_cli::run_from(std::env::args_os()));
}
