fn main() {
    std::process::exit(cpmean::run(std::env::args_os()));
}
