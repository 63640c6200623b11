fn main() {
    std::process::exit(swipt_cli::run_cli(std::env::args_os()));
}
