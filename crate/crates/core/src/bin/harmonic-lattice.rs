fn main() {
    std::process::exit(harmonic_lattice::cli::main_from_env());
}
