fn main() {
    std::process::exit(typedflow::cli::run(std::env::args_os()));
}
