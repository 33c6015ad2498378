fn main() {
    std::process::exit(randamp::cli::run(std::env::args_os()));
}
