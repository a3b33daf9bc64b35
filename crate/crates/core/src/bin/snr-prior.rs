fn main() {
    std::process::exit(snr_prior::cli::main_with_args(std::env::args_os()));
}
