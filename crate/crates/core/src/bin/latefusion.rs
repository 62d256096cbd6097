fn main() {
    std::process::exit(latefusion::cli::main());
}
