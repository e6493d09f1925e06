fn main() {
    std::process::exit(dtn_spectra::cli::main_with_args(std::env::args_os()));
}
