fn main() {
    std::process::exit(rankfn::cli::main());
}
