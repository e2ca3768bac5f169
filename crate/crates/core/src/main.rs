fn main() {
    std::process::exit(unipotent::cli::run(std::env::args_os()));
}
