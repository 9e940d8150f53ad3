fn main() {
    vtm::cli::init_logging();
    std::process::exit(vtm::cli::run(std::env::args_os()));
}
