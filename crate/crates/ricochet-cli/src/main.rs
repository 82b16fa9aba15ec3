fn main() {
    std::process::exit(ricochet_cli::run(std::env::args_os()));
}
