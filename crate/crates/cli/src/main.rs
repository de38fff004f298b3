fn main() {
    std::process::exit(okb::main_with(std::env::args_os()));
}
