fn main() {
    std::process::exit(ftacq::cli::run_cli(std::env::args_os()));
}
