fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NSBOX_LOG")).init();
    std::process::exit(nsbox::cli::run(std::env::args_os()));
}
