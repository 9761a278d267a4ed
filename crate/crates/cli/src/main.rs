fn main() {
    std::process::exit(tw_cli::run_cli(std::env::args_os()));
}
