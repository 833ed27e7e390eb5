fn main() {
    std::process::exit(dbp_core::cli::run_command(std::env::args()));
}
