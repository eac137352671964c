//! Runs a builtin agent as an external process speaking the turn protocol.

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use locm_core::agents::{self, BUILTIN_NAMES};
use locm_core::protocol::{render_actions, AgentView};
use locm_core::Version;

#[derive(Parser)]
#[command(name = "locm-agent", about = "Builtin agent over stdin/stdout")]
struct Args {
    /// One of baseline1, baseline2, random2lanes, random, greedy.
    name: String,
    #[arg(long, default_value = "1.2")]
    version: Version,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(mut agent) = agents::by_name(&args.name, args.seed) else {
        eprintln!("unknown agent {:?}; expected one of {}", args.name, BUILTIN_NAMES.join(", "));
        return ExitCode::from(2);
    };
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut out = std::io::stdout().lock();
    loop {
        let line = match AgentView::read_from(&mut input, args.version) {
            Ok(Some(view)) => render_actions(&agent.act(&view), args.version),
            Ok(None) => return ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("bad turn input: {e}");
                "PASS".to_string()
            }
        };
        if writeln!(out, "{line}").and_then(|_| out.flush()).is_err() {
            return ExitCode::SUCCESS;
        }
    }
}
