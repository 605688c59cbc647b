use std::io::{self, BufRead};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let mut input: Box<dyn BufRead> = Box::new(stdin.lock());
    let code = mttl::cli::run(std::env::args_os(), &mut *input, &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
