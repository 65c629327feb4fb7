fn main() {
    std::process::exit(hardy_rellich_cli::run(std::env::args_os()));
}
