fn main() {
    std::process::exit(goalsetting::cli::run(std::env::args_os()));
}
