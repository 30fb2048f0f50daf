fn main() {
    std::process::exit(ablation_core::cli::run(std::env::args_os()));
}
