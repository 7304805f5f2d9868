fn main() {
    std::process::exit(chaingeo_cli::run(std::env::args_os()));
}
