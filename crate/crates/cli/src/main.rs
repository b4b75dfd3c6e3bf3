use std::io::{BufReader, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use slownim_cli::{error_code, run, Cli, Io};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut input = BufReader::new(std::io::stdin());
    let mut out = BufWriter::new(std::io::stdout());
    let mut err = std::io::stderr();
    let mut io = Io { input: &mut input, out: &mut out, err: &mut err };
    let code = match run(cli, &mut io) {
        Ok(status) => status.code(),
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            let _ = std::io::Write::flush(io.out);
            eprintln!("error: {e:#}");
            error_code(&e)
        }
    };
    let _ = std::io::Write::flush(&mut out);
    ExitCode::from(code as u8)
}

// A closed downstream pipe (e.g. `| head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || matches!(c.downcast_ref::<slownim::Error>(), Some(slownim::Error::Io(io)) if io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}
