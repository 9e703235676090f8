fn main() {
    std::process::exit(pmcode_cli::cli_run(std::env::args_os()));
}
