fn main() {
    std::process::exit(stochdist::cli::cli_dispatch(std::env::args_os()));
}
