fn main() {
    std::process::exit(tdesign_cli::run_cli(std::env::args_os()));
}
