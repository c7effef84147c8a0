use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POSELIFT_LOG", "warn")).init();
    poselift::cli::main_with_args(std::env::args_os())
}
