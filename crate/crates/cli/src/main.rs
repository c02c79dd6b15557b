fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(secular_cli::cli_main(&argv));
}
