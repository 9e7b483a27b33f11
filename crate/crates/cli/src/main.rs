fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(multisense_cli::run(argv));
}
