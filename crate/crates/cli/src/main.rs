use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = pointer_amp_cli::init_threads() {
        eprintln!("{}", e.machine_line());
        return ExitCode::from(e.exit_code() as u8);
    }
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = pointer_amp_cli::main_with(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
