fn main() {
    std::process::exit(tcsim_cli::run(std::env::args_os()));
}
