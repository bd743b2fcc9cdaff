use std::process::ExitCode;

fn main() -> ExitCode {
    let out = worldset::fmt::cli::run(std::env::args());
    if out.code == 0 {
        print!("{}", out.text);
        ExitCode::SUCCESS
    } else {
        eprint!("{}", out.text);
        ExitCode::from(out.code as u8)
    }
}
