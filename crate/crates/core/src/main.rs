fn main() {
    std::process::exit(mesodrop::cli::main_entry());
}
