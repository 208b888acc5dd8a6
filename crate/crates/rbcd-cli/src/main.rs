fn main() {
    std::process::exit(rbcd_cli::cli_main(std::env::args_os()));
}
