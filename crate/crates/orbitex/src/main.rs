fn main() {
    std::process::exit(orbitex::cli::run());
}
