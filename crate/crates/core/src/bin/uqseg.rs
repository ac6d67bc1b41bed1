fn main() {
    std::process::exit(uqseg::cli::run(std::env::args_os()));
}
