fn main() {
    std::process::exit(o2h::cli::main_entry());
}
