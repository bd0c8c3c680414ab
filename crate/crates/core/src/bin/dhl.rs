fn main() {
    std::process::exit(dhl_rg::cli::run(std::env::args_os()));
}
