use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (report, outcome, code) = cheq_cli::run_from_args(std::env::args_os());
    if let Some(r) = report {
        let _ = writeln!(std::io::stdout(), "{}", r.to_json());
    }
    if let Err(e) = outcome {
        eprintln!("error: {e}");
    }
    ExitCode::from(code as u8)
}
