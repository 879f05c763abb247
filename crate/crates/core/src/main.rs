fn main() {
    let code = devils_menu::cli::dispatch(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
