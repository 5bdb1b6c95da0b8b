use std::process::ExitCode;

fn main() -> ExitCode {
    let result = ssp_cli::run(std::env::args_os());
    if let Some(text) = &result.stdout {
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
    }
    if result.exit_code == ssp_cli::EXIT_OK && result.stdout.is_none() {
        println!("{}", result.summary);
    } else {
        eprintln!("{}", result.summary);
    }
    ExitCode::from(result.exit_code as u8)
}
