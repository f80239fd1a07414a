fn main() {
    std::process::exit(torsionlab::dispatch(std::env::args_os()));
}
