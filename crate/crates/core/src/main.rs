fn main() {
    std::process::exit(fixed_dihedral::cli::run(std::env::args_os()));
}
