use std::process::ExitCode;

fn main() -> ExitCode {
    match chunkalign::cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(chunkalign::cli::exit_code(&error))
        }
    }
}
