fn main() {
    std::process::exit(bapmnmf_cli::run(std::env::args()));
}
