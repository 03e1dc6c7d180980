//! Reading, checking and writing game files.
//!
//! cargo run --example game_file -- crates/core/fixtures/quitting_game.toml

use std::path::PathBuf;

use stochgame::cli::{read_game, run_check, run_info, serialize_game, CheckOptions, Report};
use stochgame::wgame::DEFAULT_MAX_ENTRIES;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/quitting_game.toml"));
    let loaded = read_game(&path).unwrap_or_else(|e| {
        eprintln!("{}: {e}", path.display());
        std::process::exit(e.exit_code());
    });
    print!("{}", run_info(&loaded, 20, DEFAULT_MAX_ENTRIES).human());
    print!("{}", run_check(&loaded, &CheckOptions::default()).unwrap().human());
    let text = serialize_game(&loaded.game, loaded.initial_state, loaded.label.as_deref());
    println!(
        "\nserialized form has {} lines; first reward entry:",
        text.lines().count()
    );
    for line in text.lines().skip_while(|l| !l.starts_with("[[reward]]")).take(5) {
        println!("  {line}");
    }
}
