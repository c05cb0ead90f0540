use std::io;
use std::process::ExitCode;

use clap::Parser;
use masspcf::cli::{self, Cli};
use masspcf::CancelToken;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cancel = CancelToken::new();
    let handler_token = cancel.clone();
    // a second interrupt stops immediately
    let _ = ctrlc::set_handler(move || {
        if handler_token.is_cancelled() {
            std::process::exit(cli::EXIT_CANCELLED);
        }
        handler_token.cancel();
    });
    let code = cli::run(
        &cli,
        &cancel,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
