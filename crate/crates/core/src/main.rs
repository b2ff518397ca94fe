fn main() {
    std::process::exit(cwstab::expcli::cli::run(std::env::args_os()));
}
