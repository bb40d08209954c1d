fn main() {
    std::process::exit(nonlocal_trefftz_cli::run(std::env::args_os()));
}
