fn main() {
    std::process::exit(ontofact::cli::run(std::env::args_os()));
}
