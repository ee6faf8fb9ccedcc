fn main() {
    std::process::exit(assertsec::cli::main());
}
