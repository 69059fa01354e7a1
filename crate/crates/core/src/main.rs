fn main() {
    std::process::exit(torus_mobius::cli::run(std::env::args_os()));
}
