fn main() {
    std::process::exit(sta_core::harness::cli::cli_main(std::env::args_os()));
}
