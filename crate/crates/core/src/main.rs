fn main() {
    std::process::exit(mvaug::cli::main_from_env());
}
