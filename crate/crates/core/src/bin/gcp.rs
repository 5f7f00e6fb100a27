fn main() {
    std::process::exit(gcp_core::cli::main_from_env());
}
