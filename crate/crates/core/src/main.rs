fn main() {
    std::process::exit(logiceval::cli::run(std::env::args_os()));
}
