fn main() {
    std::process::exit(shamans_cli::run(std::env::args_os()));
}
