fn main() {
    std::process::exit(gravpano::cli::main_entry());
}
