fn main() {
    std::process::exit(qsumm::cli::run());
}
