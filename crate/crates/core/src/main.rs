fn main() {
    std::process::exit(latexedit::cli::run(std::env::args_os()));
}
