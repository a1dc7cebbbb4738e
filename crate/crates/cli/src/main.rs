fn main() {
    std::process::exit(metaudit::run_from(std::env::args_os()));
}
