fn main() {
    std::process::exit(normrev::cli::main());
}
