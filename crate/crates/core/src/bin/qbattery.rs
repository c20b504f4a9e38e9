fn main() {
    std::process::exit(qbattery::cli::run(std::env::args_os()));
}
