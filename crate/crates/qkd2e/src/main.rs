fn main() {
    std::process::exit(qkd2e::cli::main());
}
