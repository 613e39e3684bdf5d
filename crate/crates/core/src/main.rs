fn main() {
    std::process::exit(schiffer_lab::cli::run(std::env::args_os()));
}
