fn main() {
    std::process::exit(assist_sim::cli::main_from_env());
}
