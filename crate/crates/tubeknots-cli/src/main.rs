fn main() {
    eprintln!("tubeknots: command-line interface under construction");
    std::process::exit(2);
}
