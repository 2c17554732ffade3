//! Acceptance suite. `criteria` runs every acceptance criterion in sequence,
//! checks its runtime limit, and writes one `[PASS]`/`[FAIL]` line per
//! criterion to stderr (uncaptured, so the lines show up in `cargo test`
//! output either way). `commands` covers the CLI's documented examples and
//! exit codes.

mod commands;
mod criteria;

use std::process::{Command, Output};

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixrad")).args(args).output().unwrap()
}
