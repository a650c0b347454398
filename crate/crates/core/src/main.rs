fn main() {
    std::process::exit(paleo::cli::main_with(std::env::args_os()));
}
