fn main() {
    let (code, output) = iwasawa_cli::run(std::env::args_os());
    print!("{output}");
    std::process::exit(code);
}
