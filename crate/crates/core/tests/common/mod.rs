#![allow(dead_code)]

use std::path::PathBuf;

use stochgame::cli::{read_game, LoadedGame};
use stochgame::gamecore::{DiscountRate, Game};
use stochgame::ratlinalg::{int, rat, Rational};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

/// Every fixture, sorted by file name.
pub fn fixtures() -> Vec<(String, LoadedGame)> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .expect("fixtures directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".toml"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let g = read_game(&fixture_path(&n)).unwrap_or_else(|e| panic!("{n}: {e}"));
            (n, g)
        })
        .collect()
}

pub fn fixture(name: &str) -> LoadedGame {
    read_game(&fixture_path(name)).unwrap()
}

pub fn lam(p: i64, q: i64) -> DiscountRate {
    DiscountRate::new(rat(p, q)).unwrap()
}

pub fn big_match() -> Game {
    fixture("big_match.toml").game
}

pub fn half() -> Rational {
    rat(1, 2)
}

pub fn one() -> Rational {
    int(1)
}
