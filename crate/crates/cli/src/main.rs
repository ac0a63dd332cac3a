mod args;
mod commands;

use std::process::ExitCode;

fn main() -> ExitCode {
    let matches = args::build().get_matches();
    match commands::dispatch(&matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
