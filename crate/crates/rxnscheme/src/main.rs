fn main() {
    std::process::exit(rxnscheme::cli::run(std::env::args_os()));
}
