fn main() {
    std::process::exit(alf_instantons::cli::run(std::env::args_os()));
}
