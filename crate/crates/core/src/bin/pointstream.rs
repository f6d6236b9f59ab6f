fn main() {
    std::process::exit(pointstream::cli::main());
}
