fn main() {
    std::process::exit(rilab::cli::run(std::env::args_os()));
}
