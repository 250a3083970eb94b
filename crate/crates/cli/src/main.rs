fn main() {
    std::process::exit(hsicodec_cli::run(std::env::args_os()));
}
