fn main() {
    std::process::exit(condensate::cli::run(std::env::args_os()));
}
