//! Misbehaving agents for exercising the process runtime.
//!
//! Every mode reads whole turns like a real agent and answers `PASS` (or
//! `PICK 0` on draft turns) until its fault triggers on turn `--after`.

use std::io::{BufRead, Write};
use std::time::Duration;

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Sleep for `--ms` before answering.
    Sleep,
    /// Touch `--mb` megabytes, then answer after `--ms`.
    Alloc,
    /// Write noise to stderr on every turn.
    Stderr,
    /// Flood stdout before reading input.
    Eager,
    /// Exit without answering.
    Crash,
    /// Answer normally forever.
    Pass,
}

#[derive(Parser)]
#[command(name = "locm-fixture")]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// Zero-based turn on which the fault happens.
    #[arg(long, default_value_t = 0)]
    after: usize,
    #[arg(long, default_value_t = 1000)]
    ms: u64,
    #[arg(long, default_value_t = 64)]
    mb: usize,
}

/// Reads one turn; returns (is setup turn, option count) or None on EOF.
fn read_turn(input: &mut impl BufRead) -> Option<(bool, usize)> {
    let mut line = || {
        let mut s = String::new();
        match input.read_line(&mut s) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(s.split_whitespace().filter_map(|w| w.parse::<i64>().ok()).collect::<Vec<_>>()),
        }
    };
    let me = line()?;
    line()?;
    let counts = line()?;
    for _ in 0..*counts.get(1)? {
        line()?;
    }
    let cards = *line()?.first()? as usize;
    for _ in 0..cards {
        line()?;
    }
    Some((me.get(1) == Some(&0), cards))
}

fn main() {
    let args = Args::parse();
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut out = std::io::stdout().lock();
    let mut hoard: Vec<u8> = Vec::new();
    for turn in 0.. {
        let fault = turn == args.after;
        if fault && matches!(args.mode, Mode::Eager) {
            for _ in 0..4096 {
                let _ = writeln!(out, "{}", "PASS;".repeat(64));
            }
            let _ = out.flush();
        }
        let Some((setup, cards)) = read_turn(&mut input) else { return };
        if matches!(args.mode, Mode::Stderr) {
            eprintln!("turn {turn}: thinking hard");
        }
        if fault {
            match args.mode {
                Mode::Sleep => std::thread::sleep(Duration::from_millis(args.ms)),
                Mode::Alloc => {
                    hoard = vec![1u8; args.mb << 20];
                    std::thread::sleep(Duration::from_millis(args.ms));
                }
                Mode::Crash => std::process::exit(7),
                Mode::Stderr | Mode::Eager | Mode::Pass => {}
            }
        }
        let answer = if setup && cards == 3 { "PICK 0" } else { "PASS" };
        if writeln!(out, "{answer}").and_then(|_| out.flush()).is_err() {
            return;
        }
    }
    drop(hoard);
}
