fn main() {
    std::process::exit(xyqaoa::cli::run(std::env::args_os()));
}
