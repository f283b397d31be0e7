fn main() {
    std::process::exit(impartial::cli::main());
}
