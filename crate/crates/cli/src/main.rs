use sweepjt_cli::{main_with, parse_argv};
use sweepjt_core::console::StdConsole;

fn main() {
    let argv: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let debug = parse_argv(argv.clone()).map(|i| i.debug).unwrap_or(false);
    let level = if debug {
        log::LevelFilter::Debug
    } else {
        log::LevelFilter::Warn
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
    let dir = match std::env::current_dir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: cannot read the working directory: {e}");
            std::process::exit(sweepjt_core::ExitCode::Open.code());
        }
    };
    std::process::exit(main_with(argv, &dir, &mut StdConsole));
}
