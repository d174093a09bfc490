fn main() {
    std::process::exit(sagap::main_with(std::env::args_os()));
}
