//! Game files and the command reports behind the `stochgame` binary.
//!
//! A game file is TOML. Scalars that carry game data are strings holding
//! exact rationals (`"3/4"`, `"-2"`); indices are 1-based.
//!
//! ```toml
//! label = "one-shot"
//! states = 1
//! actions1 = 1
//! actions2 = 1
//! initial_state = 1
//!
//! [[reward]]
//! state = 1
//! i = 1
//! j = 1
//! value = "5/2"
//!
//! [[transition]]
//! state = 1
//! i = 1
//! j = 1
//! next = ["1"]
//! ```
//!
//! Every `(state, i, j)` needs exactly one reward and one transition entry;
//! `next` lists the probability of every target state in order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::{One, Signed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::absorbing::{check_f_equals_t_capped, AbsorbingGame};
use crate::error::{Error, Result};
use crate::gamecore::{discounted_payoff, DiscountRate, Game, StationaryStrategy};
use crate::generate::random_strategy;
use crate::matrixgame::{self, MatrixGame};
use crate::oracle::{mdp_brute_force, value_iteration};
use crate::ratlinalg::{int, parse_rational, pow, pow2_neg, rat, to_decimal, Rational};
use crate::solver::{
    discounted_value_with, lambda_r_exponent, limit_value_with, ser_rational, BisectionResult, LadderConfig,
    SolverOptions,
};
use crate::wgame::{
    build_w_kronecker_capped, check_size, d0_mixed, decode_profile, dk_mixed, product_row, profile_count,
    DeterminantTables, DEFAULT_MAX_ENTRIES,
};

// ---------------------------------------------------------------------------
// file format

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedGame {
    pub game: Game,
    /// 0-based.
    pub initial_state: Option<usize>,
    pub label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    label: Option<String>,
    states: Spanned<i64>,
    actions1: Spanned<i64>,
    actions2: Spanned<i64>,
    initial_state: Option<Spanned<i64>>,
    #[serde(default)]
    reward: Vec<Spanned<RawReward>>,
    #[serde(default)]
    transition: Vec<Spanned<RawTransition>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReward {
    state: Spanned<i64>,
    i: Spanned<i64>,
    j: Spanned<i64>,
    value: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    state: Spanned<i64>,
    i: Spanned<i64>,
    j: Spanned<i64>,
    next: Spanned<Vec<Spanned<String>>>,
}

#[derive(Serialize)]
struct OutGame<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    states: usize,
    actions1: usize,
    actions2: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_state: Option<usize>,
    reward: Vec<OutReward>,
    transition: Vec<OutTransition>,
}

#[derive(Serialize)]
struct OutReward {
    state: usize,
    i: usize,
    j: usize,
    value: String,
}

#[derive(Serialize)]
struct OutTransition {
    state: usize,
    i: usize,
    j: usize,
    next: Vec<String>,
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn err<T>(&self, span: std::ops::Range<usize>, field: &str, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line(span.start),
            field: field.to_string(),
            message: message.into(),
        })
    }

    fn count(&self, v: &Spanned<i64>, field: &str) -> Result<usize> {
        match usize::try_from(*v.get_ref()) {
            Ok(c) if c >= 1 => Ok(c),
            _ => self.err(
                v.span(),
                field,
                format!("expected a positive integer, got {}", v.get_ref()),
            ),
        }
    }

    /// 1-based index in `1..=size`, returned 0-based.
    fn index(&self, v: &Spanned<i64>, size: usize, field: &str) -> Result<usize> {
        match usize::try_from(*v.get_ref()) {
            Ok(c) if (1..=size).contains(&c) => Ok(c - 1),
            _ => self.err(v.span(), field, format!("{} is outside 1..={size}", v.get_ref())),
        }
    }

    fn rational(&self, v: &Spanned<String>, field: &str) -> Result<Rational> {
        parse_rational(v.get_ref()).or_else(|e| self.err(v.span(), field, e.to_string()))
    }
}

/// Parses and validates a game document.
pub fn parse_game(text: &str) -> Result<LoadedGame> {
    let loc = Locator { text };
    let raw: RawGame = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| loc.line(s.start)).unwrap_or(0),
        field: "document".to_string(),
        message: e.message().to_string(),
    })?;
    let n = loc.count(&raw.states, "states")?;
    let n_i = loc.count(&raw.actions1, "actions1")?;
    let n_j = loc.count(&raw.actions2, "actions2")?;
    let initial_state = match &raw.initial_state {
        Some(k) => Some(loc.index(k, n, "initial_state")?),
        None => None,
    };

    let cells = n
        .checked_mul(n_i)
        .and_then(|c| c.checked_mul(n_j))
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::Invalid(format!("{n}x{n_i}x{n_j} cells is too large")))?;
    let cell = |l: usize, i: usize, j: usize| (l * n_i + i) * n_j + j;

    let mut rewards: Vec<Option<Rational>> = vec![None; cells];
    for entry in &raw.reward {
        let e = entry.get_ref();
        let l = loc.index(&e.state, n, "reward.state")?;
        let i = loc.index(&e.i, n_i, "reward.i")?;
        let j = loc.index(&e.j, n_j, "reward.j")?;
        let v = loc.rational(&e.value, "reward.value")?;
        let slot = &mut rewards[cell(l, i, j)];
        if slot.is_some() {
            return loc.err(
                entry.span(),
                "reward",
                format!("duplicate reward for ({}, {}, {})", l + 1, i + 1, j + 1),
            );
        }
        *slot = Some(v);
    }

    let mut transitions: Vec<Option<Vec<Rational>>> = vec![None; cells];
    for entry in &raw.transition {
        let e = entry.get_ref();
        let l = loc.index(&e.state, n, "transition.state")?;
        let i = loc.index(&e.i, n_i, "transition.i")?;
        let j = loc.index(&e.j, n_j, "transition.j")?;
        let next = e.next.get_ref();
        if next.len() != n {
            return loc.err(
                e.next.span(),
                "transition.next",
                format!("{} probabilities listed, expected one per state ({n})", next.len()),
            );
        }
        let row = next
            .iter()
            .map(|p| {
                let v = loc.rational(p, "transition.next")?;
                if v.is_negative() {
                    return loc.err(p.span(), "transition.next", format!("negative probability {v}"));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let sum: Rational = row.iter().sum();
        if !sum.is_one() {
            return Err(Error::NotStochastic {
                state: l + 1,
                i: i + 1,
                j: j + 1,
                sum,
            });
        }
        let slot = &mut transitions[cell(l, i, j)];
        if slot.is_some() {
            return loc.err(
                entry.span(),
                "transition",
                format!("duplicate transition for ({}, {}, {})", l + 1, i + 1, j + 1),
            );
        }
        *slot = Some(row);
    }

    let missing = |what: &str, c: usize| {
        let (l, rest) = (c / (n_i * n_j), c % (n_i * n_j));
        Error::Invalid(format!(
            "no {what} entry for (state {}, i {}, j {})",
            l + 1,
            rest / n_j + 1,
            rest % n_j + 1
        ))
    };
    let rewards = rewards
        .into_iter()
        .enumerate()
        .map(|(c, v)| v.ok_or_else(|| missing("reward", c)))
        .collect::<Result<Vec<_>>>()?;
    let transitions = transitions
        .into_iter()
        .enumerate()
        .map(|(c, v)| v.ok_or_else(|| missing("transition", c)))
        .collect::<Result<Vec<_>>>()?
        .concat();

    Ok(LoadedGame {
        game: Game::new(n, n_i, n_j, rewards, transitions)?,
        initial_state,
        label: raw.label,
    })
}

pub fn read_game(path: &Path) -> Result<LoadedGame> {
    parse_game(&std::fs::read_to_string(path)?)
}

/// Writes `game` in the file format; `initial_state` is 0-based.
pub fn serialize_game(game: &Game, initial_state: Option<usize>, label: Option<&str>) -> String {
    let mut reward = Vec::new();
    let mut transition = Vec::new();
    for l in 0..game.states() {
        for i in 0..game.actions1() {
            for j in 0..game.actions2() {
                reward.push(OutReward {
                    state: l + 1,
                    i: i + 1,
                    j: j + 1,
                    value: game.reward(l, i, j).to_string(),
                });
                transition.push(OutTransition {
                    state: l + 1,
                    i: i + 1,
                    j: j + 1,
                    next: game.transition(l, i, j).iter().map(|p| p.to_string()).collect(),
                });
            }
        }
    }
    let out = OutGame {
        label,
        states: game.states(),
        actions1: game.actions1(),
        actions2: game.actions2(),
        initial_state: initial_state.map(|k| k + 1),
        reward,
        transition,
    };
    toml::to_string(&out).expect("game serializes")
}

// ---------------------------------------------------------------------------
// reports

/// Something the binary can print either as text or as JSON.
pub trait Report: Serialize {
    fn human(&self) -> String;

    fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Decimal digits that resolve `2^{-r}`.
pub fn decimal_digits(r: u32) -> usize {
    (r as usize * 30103).div_ceil(100000) + 2
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn header(label: &Option<String>, game: &Game) -> String {
    format!(
        "{}{} states, {}x{} actions",
        label.as_ref().map(|l| format!("{l}: ")).unwrap_or_default(),
        game.states(),
        game.actions1(),
        game.actions2()
    )
}

fn write_trace(out: &mut String, res: &BisectionResult, with_rung: bool) {
    let _ = writeln!(
        out,
        "  {:>4}  {:>14}  {:>8}  {:>14}  {:>14}{}",
        "step",
        "z",
        "sign",
        "lower",
        "upper",
        if with_rung { "  rung" } else { "" }
    );
    for (n, s) in res.trace.iter().enumerate() {
        let rung = if with_rung {
            res.evidence
                .get(n)
                .map(|e| format!("  {}", e.stabilization_rung))
                .unwrap_or_default()
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "  {:>4}  {:>14}  {:>8}  {:>14}  {:>14}{rung}",
            n + 1,
            s.z.to_string(),
            s.sign.to_string(),
            s.lower.to_string(),
            s.upper.to_string()
        );
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscountedReport {
    pub label: Option<String>,
    /// 1-based.
    pub state: usize,
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    pub precision: u32,
    pub decimal: String,
    pub result: BisectionResult,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub header: String,
}

impl Report for DiscountedReport {
    fn human(&self) -> String {
        let r = &self.result;
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header);
        let _ = writeln!(out, "discounted value, state {}, lambda {}", self.state, self.lambda);
        let _ = writeln!(out, "  estimate   {}  ({})", r.value_estimate, self.decimal);
        let _ = writeln!(out, "  radius     {}  (target 2^-{})", r.radius, self.precision);
        let _ = writeln!(out, "  bracket    [{}, {}]", r.lower, r.upper);
        let _ = writeln!(out, "  iterations {}", r.iterations);
        write_trace(&mut out, r, false);
        let _ = writeln!(out, "  elapsed    {:.1} ms", self.elapsed_ms);
        out
    }
}

pub fn run_discounted(
    loaded: &LoadedGame,
    k: usize,
    lambda: &DiscountRate,
    r: u32,
    opts: &SolverOptions,
) -> Result<DiscountedReport> {
    let start = Instant::now();
    let result = discounted_value_with(&loaded.game, k, lambda, r, opts)?;
    Ok(DiscountedReport {
        label: loaded.label.clone(),
        state: k + 1,
        lambda: lambda.value().clone(),
        precision: r,
        decimal: to_decimal(&result.value_estimate, decimal_digits(r)),
        result,
        elapsed_ms: ms(start),
        header: header(&loaded.label, &loaded.game),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueReport {
    pub label: Option<String>,
    pub state: usize,
    pub precision: u32,
    pub decimal: String,
    pub discrepancies: usize,
    pub deepest_stabilization_rung: u32,
    pub lambda_r_exponent: Option<u64>,
    pub result: BisectionResult,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub header: String,
}

impl Report for ValueReport {
    fn human(&self) -> String {
        let r = &self.result;
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header);
        let _ = writeln!(out, "limit value, state {}", self.state);
        let _ = writeln!(out, "  estimate   {}  ({})", r.value_estimate, self.decimal);
        let _ = writeln!(out, "  radius     {}  (target 2^-{})", r.radius, self.precision);
        let _ = writeln!(out, "  bracket    [{}, {}]", r.lower, r.upper);
        let _ = writeln!(out, "  iterations {}", r.iterations);
        let _ = writeln!(
            out,
            "  ladder     deepest stabilization at lambda = 2^-{}",
            self.deepest_stabilization_rung
        );
        match self.lambda_r_exponent {
            Some(e) => {
                let _ = writeln!(
                    out,
                    "  lambda_r   2^-{e}, {} discrepancies with the ladder",
                    self.discrepancies
                );
            }
            None => {
                let _ = writeln!(out, "  lambda_r   not evaluated");
            }
        }
        write_trace(&mut out, r, true);
        let _ = writeln!(out, "  elapsed    {:.1} ms", self.elapsed_ms);
        out
    }
}

pub fn run_value(loaded: &LoadedGame, k: usize, r: u32, opts: &SolverOptions) -> Result<ValueReport> {
    let start = Instant::now();
    let result = limit_value_with(&loaded.game, k, r, opts)?;
    let evaluated = result.evidence.iter().find(|e| e.lambda_r_sign.is_some());
    Ok(ValueReport {
        label: loaded.label.clone(),
        state: k + 1,
        precision: r,
        decimal: to_decimal(&result.value_estimate, decimal_digits(r)),
        discrepancies: result.discrepancies(),
        deepest_stabilization_rung: result.evidence.iter().map(|e| e.stabilization_rung).max().unwrap_or(0),
        lambda_r_exponent: evaluated.map(|e| e.lambda_r_exponent),
        result,
        elapsed_ms: ms(start),
        header: header(&loaded.label, &loaded.game),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub label: Option<String>,
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub tol: Rational,
    pub values: Vec<String>,
    pub decimals: Vec<String>,
    #[serde(serialize_with = "ser_rational")]
    pub error_bound: Rational,
    pub iterations: usize,
    /// Exact one-player values per state, when one side has a single action.
    pub brute_force: Option<Vec<String>>,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub header: String,
}

impl Report for OracleReport {
    fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header);
        let _ = writeln!(
            out,
            "value iteration, lambda {}, {} iterations, error bound {}",
            self.lambda, self.iterations, self.error_bound
        );
        for (k, (v, d)) in self.values.iter().zip(&self.decimals).enumerate() {
            let exact = self
                .brute_force
                .as_ref()
                .map(|b| format!("  exact {}", b[k]))
                .unwrap_or_default();
            let _ = writeln!(out, "  state {:>3}  {d}  ({v}){exact}", k + 1);
        }
        let _ = writeln!(out, "  elapsed {:.1} ms", self.elapsed_ms);
        out
    }
}

pub fn run_oracle(loaded: &LoadedGame, lambda: &DiscountRate, tol: &Rational) -> Result<OracleReport> {
    let start = Instant::now();
    let game = &loaded.game;
    let vi = value_iteration(game, lambda, tol)?;
    let digits = {
        let mut d = 2;
        let mut p = Rational::one();
        while &p > tol {
            p /= int(10);
            d += 1;
        }
        d
    };
    let brute_force = if (game.actions1() == 1 || game.actions2() == 1) && game.states() <= 6 {
        Some(
            (0..game.states())
                .map(|k| mdp_brute_force(game, k, lambda).map(|v| v.to_string()))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(OracleReport {
        label: loaded.label.clone(),
        lambda: lambda.value().clone(),
        tol: tol.clone(),
        decimals: vi.values.iter().map(|v| to_decimal(v, digits)).collect(),
        values: vi.values.iter().map(|v| v.to_string()).collect(),
        error_bound: vi.error_bound,
        iterations: vi.iterations,
        brute_force,
        elapsed_ms: ms(start),
        header: header(&loaded.label, game),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoReport {
    pub label: Option<String>,
    pub states: usize,
    pub actions1: usize,
    pub actions2: usize,
    pub initial_state: Option<usize>,
    pub w_rows: String,
    pub w_cols: String,
    pub w_within_cap: bool,
    #[serde(serialize_with = "ser_rational")]
    pub reward_min: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub reward_max: Rational,
    pub common_denominator: String,
    /// `"max"` or `"min"` when one player has a single action.
    pub one_player: Option<String>,
    /// 1-based live states for which the game is absorbing.
    pub absorbing_live_states: Vec<usize>,
    pub lambda_r_exponent: u64,
    pub precision: u32,
}

impl Report for InfoReport {
    fn human(&self) -> String {
        let mut out = String::new();
        if let Some(l) = &self.label {
            let _ = writeln!(out, "{l}");
        }
        let _ = writeln!(out, "  states             {}", self.states);
        let _ = writeln!(out, "  actions            {} x {}", self.actions1, self.actions2);
        if let Some(k) = self.initial_state {
            let _ = writeln!(out, "  initial state      {k}");
        }
        let _ = writeln!(
            out,
            "  W size             {} x {}{}",
            self.w_rows,
            self.w_cols,
            if self.w_within_cap {
                ""
            } else {
                "  (above the entry cap)"
            }
        );
        let _ = writeln!(out, "  rewards            [{}, {}]", self.reward_min, self.reward_max);
        let _ = writeln!(out, "  common denominator {}", self.common_denominator);
        if let Some(p) = &self.one_player {
            let _ = writeln!(out, "  one-player game    ({p})");
        }
        if !self.absorbing_live_states.is_empty() {
            let _ = writeln!(
                out,
                "  absorbing          live state(s) {:?}",
                self.absorbing_live_states
            );
        }
        let _ = writeln!(
            out,
            "  lambda_r           2^-{} at precision {}",
            self.lambda_r_exponent, self.precision
        );
        out
    }
}

pub fn run_info(loaded: &LoadedGame, r: u32, cap: u128) -> InfoReport {
    let g = &loaded.game;
    let norm = crate::gamecore::affine_normalize(g);
    let (lo, hi) = g.reward_bounds();
    InfoReport {
        label: loaded.label.clone(),
        states: g.states(),
        actions1: g.actions1(),
        actions2: g.actions2(),
        initial_state: loaded.initial_state.map(|k| k + 1),
        w_rows: profile_count(g.actions1(), g.states()).to_string(),
        w_cols: profile_count(g.actions2(), g.states()).to_string(),
        w_within_cap: check_size(g, cap).is_ok(),
        reward_min: lo,
        reward_max: hi,
        common_denominator: g.common_denominator().to_string(),
        one_player: match (g.actions1(), g.actions2()) {
            (_, 1) => Some("max".to_string()),
            (1, _) => Some("min".to_string()),
            _ => None,
        },
        absorbing_live_states: crate::absorbing::live_state_candidates(g)
            .iter()
            .map(|k| k + 1)
            .collect(),
        lambda_r_exponent: lambda_r_exponent(&norm.game, r),
        precision: r,
    }
}

// ---------------------------------------------------------------------------
// check

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub status: Status,
    pub cases: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub label: Option<String>,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
    pub all_passed: bool,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub header: String,
}

impl Report for CheckReport {
    fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header);
        for p in &self.properties {
            let tag = match p.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = writeln!(out, "  {tag}  {:<24} {:>5} cases  {}", p.name, p.cases, p.detail);
        }
        let _ = writeln!(
            out,
            "{}  ({:.1} ms)",
            if self.all_passed {
                "all properties hold"
            } else {
                "some properties FAILED"
            },
            self.elapsed_ms
        );
        out
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub lambdas: Vec<Rational>,
    pub seed: u64,
    pub max_entries: u128,
    /// Largest `W` (rows and columns) on which the Shapley–Snow enumeration runs.
    pub snow_limit: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            lambdas: vec![rat(1, 2), rat(1, 4), rat(1, 10)],
            seed: 1,
            max_entries: DEFAULT_MAX_ENTRIES,
            snow_limit: 16,
        }
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            failure: None,
        }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn finish(self, pass_detail: &str) -> PropertyResult {
        let (status, detail) = match self.failure {
            Some(f) => (Status::Fail, f),
            None => (Status::Pass, pass_detail.to_string()),
        };
        PropertyResult {
            name: self.name.to_string(),
            status,
            cases: self.cases,
            detail,
        }
    }
}

fn skipped(name: &str, why: &str) -> PropertyResult {
    PropertyResult {
        name: name.to_string(),
        status: Status::Skipped,
        cases: 0,
        detail: why.to_string(),
    }
}

fn mg_value(m: crate::ratlinalg::RatMatrix) -> Result<Rational> {
    Ok(matrixgame::value(&MatrixGame::new(m)?))
}

/// Runs the exact invariant suite on one game.
pub fn run_check(loaded: &LoadedGame, opts: &CheckOptions) -> Result<CheckReport> {
    let start = Instant::now();
    let game = &loaded.game;
    let n = game.states();
    let (n_i, n_j) = (game.actions1(), game.actions2());
    check_size(game, opts.max_entries)?;
    let lambdas = opts
        .lambdas
        .iter()
        .map(|l| DiscountRate::new(l.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lo, hi) = game.reward_bounds();
    let span = if hi > lo { &hi - &lo } else { Rational::one() };
    let z_grid: Vec<Rational> = (-1..=5).map(|t| &lo + &span * rat(t, 4)).collect();

    let mut d0_bound = Tally::new("d0_lower_bound");
    let mut cramer = Tally::new("cramer_payoff");
    let mut multilinear = Tally::new("multilinearity");
    let mut decrease = Tally::new("strict_decrease");
    let mut root = Tally::new("root_at_oracle_value");
    let mut kron = Tally::new("kronecker_equivalence");
    let mut snow = Tally::new("shapley_snow_agreement");
    let (rows, cols) = check_size(game, opts.max_entries)?;
    let run_snow = rows <= opts.snow_limit && cols <= opts.snow_limit;

    for lambda in &lambdas {
        let lam_n = pow(lambda.value(), n);
        let oracle = value_iteration(game, lambda, &pow2_neg(16))?;
        for k in 0..n {
            let tables = DeterminantTables::new(game, k, lambda, opts.max_entries)?;
            let d0 = tables.d0_matrix();
            let dk = tables.dk_matrix();

            for r in 0..rows {
                let i_vec = decode_profile(r, n_i, n);
                for c in 0..cols {
                    let j_vec = decode_profile(c, n_j, n);
                    if k == 0 {
                        let d = d0.get(r, c);
                        d0_bound.case(d >= &lam_n, || {
                            format!("d0 = {d} < lambda^n = {lam_n} at lambda {}", lambda.value())
                        });
                    }
                    if r * cols + c < 256 {
                        let x = StationaryStrategy::pure(&i_vec, n_i);
                        let y = StationaryStrategy::pure(&j_vec, n_j);
                        let gamma = discounted_payoff(game, &x, &y, lambda)?;
                        cramer.case(&gamma[k] * d0.get(r, c) == *dk.get(r, c), || {
                            format!("payoff times d0 differs from dk at profile row {r}, column {c}")
                        });
                    }
                }
            }

            let z = &z_grid[2];
            let w = tables.at(z).payoff;
            for _ in 0..3 {
                let x = random_strategy(&mut rng, n, n_i, 4);
                let row = product_row(&w, &x, n_i);
                for (c, got) in row.iter().enumerate() {
                    let y = StationaryStrategy::pure(&decode_profile(c, n_j, n), n_j);
                    let want = dk_mixed(game, k, &x, &y, lambda)? - z * d0_mixed(game, &x, &y, lambda)?;
                    multilinear.case(got == &want, || {
                        format!("x.W = {got} but dk - z.d0 = {want} at column {c}")
                    });
                }
            }

            let vals = z_grid
                .iter()
                .map(|z| mg_value(tables.at(z).payoff))
                .collect::<Result<Vec<_>>>()?;
            for t in 1..z_grid.len() {
                let gap = &vals[t - 1] - &vals[t];
                let need = (&z_grid[t] - &z_grid[t - 1]) * &lam_n;
                decrease.case(gap >= need, || {
                    format!(
                        "val W gap {gap} below {need} between z = {} and {}",
                        z_grid[t - 1],
                        z_grid[t]
                    )
                });
            }

            let u = &oracle.values[k];
            let eb = &oracle.error_bound;
            let below = mg_value(tables.at(&(u - eb)).payoff)?;
            let above = mg_value(tables.at(&(u + eb)).payoff)?;
            root.case(!below.is_negative() && !above.is_positive(), || {
                format!(
                    "val W changes sign outside oracle interval around {u} (state {})",
                    k + 1
                )
            });

            let kw = build_w_kronecker_capped(game, k, lambda, z, opts.max_entries)?.payoff;
            kron.case(kw == w, || {
                format!("Kronecker route differs (state {}, lambda {})", k + 1, lambda.value())
            });

            if run_snow {
                let m = MatrixGame::new(w)?;
                let ss = matrixgame::shapley_snow_value(&m)?;
                let v = matrixgame::value(&m);
                snow.case(ss == v, || format!("Shapley-Snow {ss} vs simplex {v}"));
            }
        }
    }

    let mut properties = vec![
        d0_bound.finish("d0 >= lambda^n on every pure profile"),
        cramer.finish("payoff * d0 = dk on pure profiles"),
        multilinear.finish("x.W matches mixed determinants"),
        decrease.finish("val W decreases with slope >= lambda^n"),
        root.finish("val W changes sign inside the oracle interval"),
        kron.finish("direct and Kronecker W agree entrywise"),
    ];
    properties.push(if run_snow {
        snow.finish("determinant formula matches simplex")
    } else {
        skipped("shapley_snow_agreement", "W larger than the enumeration limit")
    });

    properties.push(match AbsorbingGame::detect(game) {
        Err(_) => skipped("absorbing_identity", "game is not absorbing"),
        Ok(a) => {
            let mut t = Tally::new("absorbing_identity");
            for lambda in &lambdas {
                for z in &z_grid {
                    let rep = check_f_equals_t_capped(&a, lambda, z, opts.max_entries)?;
                    t.case(rep.holds(), || rep.first_violation().unwrap_or_default());
                }
            }
            let constant = a.constant_absorbing_rewards();
            let detail = if constant {
                "val W/lambda^n equals Kohlberg's quotient; W reduces entrywise"
            } else {
                "val W/lambda^n equals Kohlberg's quotient"
            };
            let mut res = t.finish(detail);
            res.detail = format!("{} (live state {})", res.detail, a.live_state() + 1);
            res
        }
    });

    if n_i == 1 || n_j == 1 {
        let mut t = Tally::new("one_player_agreement");
        for lambda in &lambdas {
            for k in 0..n {
                let exact = mdp_brute_force(game, k, lambda)?;
                let res = discounted_value_with(
                    game,
                    k,
                    lambda,
                    12,
                    &SolverOptions {
                        max_entries: opts.max_entries,
                        ..Default::default()
                    },
                )?;
                let ok = res.lower <= exact && exact <= res.upper;
                t.case(ok, || {
                    format!("brute force {exact} outside [{}, {}]", res.lower, res.upper)
                });
            }
        }
        properties.push(t.finish("bisection brackets the brute-force value"));
    }

    let all_passed = properties.iter().all(|p| p.status != Status::Fail);
    Ok(CheckReport {
        label: loaded.label.clone(),
        seed: opts.seed,
        properties,
        all_passed,
        elapsed_ms: ms(start),
        header: header(&loaded.label, game),
    })
}

// ---------------------------------------------------------------------------
// command line

#[derive(Debug, Parser)]
#[command(
    name = "stochgame",
    version,
    about = "Exact values of finite zero-sum stochastic games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Game file (TOML).
    pub game: PathBuf,
    /// Print machine-readable JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 2^-r approximation of the discounted value.
    Discounted {
        #[command(flatten)]
        common: Common,
        /// Discount rate as p/q in (0,1].
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 20)]
        precision: u32,
        /// Initial state, 1-based (defaults to the file's initial_state, then 1).
        #[arg(long)]
        state: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
        max_entries: u128,
    },
    /// 2^-r approximation of the limit value.
    Value {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        precision: u32,
        #[arg(long)]
        state: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
        max_entries: u128,
        /// Deepest ladder rung t (lambda = 2^-t).
        #[arg(long, default_value_t = 256)]
        ladder_depth: u32,
    },
    /// Value iteration for the discounted values of all states.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: String,
        /// Sup-norm tolerance as p/q.
        #[arg(long, default_value = "1/1048576")]
        tol: String,
    },
    /// Run the exact invariant suite on the game.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
        max_entries: u128,
    },
    /// Sizes and structural facts about the game.
    Info {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        precision: u32,
        #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
        max_entries: u128,
    },
}

/// Text printed on stdout plus the process exit code.
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn pick_state(loaded: &LoadedGame, state: Option<usize>) -> Result<usize> {
    let n = loaded.game.states();
    match state {
        Some(k) if (1..=n).contains(&k) => Ok(k - 1),
        Some(k) => Err(Error::IndexOutOfRange { index: k, size: n }),
        None => Ok(loaded.initial_state.unwrap_or(0)),
    }
}

fn parse_lambda(s: &str) -> Result<DiscountRate> {
    DiscountRate::new(parse_rational(s)?)
}

fn render(r: &impl Report, json: bool) -> String {
    if json {
        r.json() + "\n"
    } else {
        r.human()
    }
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::ResourceCap { .. } => {
            Some("the W matrix grows like |I|^n x |J|^n; try a smaller game or pass a larger --max-entries")
        }
        Error::UndecidedSign { .. } => {
            Some("pass a larger --ladder-depth; the sign is eventually constant but may settle late")
        }
        Error::Parse { .. } | Error::NotStochastic { .. } => {
            Some("see the crate documentation of `cli` for the file format")
        }
        _ => None,
    }
}

fn dispatch(cli: &Cli) -> Result<(String, i32)> {
    match &cli.command {
        Command::Discounted {
            common,
            lambda,
            precision,
            state,
            max_entries,
        } => {
            let loaded = read_game(&common.game)?;
            let k = pick_state(&loaded, *state)?;
            let opts = SolverOptions {
                max_entries: *max_entries,
                ..Default::default()
            };
            let rep = run_discounted(&loaded, k, &parse_lambda(lambda)?, *precision, &opts)?;
            Ok((render(&rep, common.json), 0))
        }
        Command::Value {
            common,
            precision,
            state,
            max_entries,
            ladder_depth,
        } => {
            let loaded = read_game(&common.game)?;
            let k = pick_state(&loaded, *state)?;
            let opts = SolverOptions {
                max_entries: *max_entries,
                ladder: LadderConfig {
                    max_depth: *ladder_depth,
                    ..LadderConfig::default()
                },
                ..Default::default()
            };
            let rep = run_value(&loaded, k, *precision, &opts)?;
            Ok((render(&rep, common.json), 0))
        }
        Command::Oracle { common, lambda, tol } => {
            let loaded = read_game(&common.game)?;
            let tol = parse_rational(tol)?;
            if !tol.is_positive() {
                return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
            }
            let rep = run_oracle(&loaded, &parse_lambda(lambda)?, &tol)?;
            Ok((render(&rep, common.json), 0))
        }
        Command::Check {
            common,
            seed,
            max_entries,
        } => {
            let loaded = read_game(&common.game)?;
            let opts = CheckOptions {
                seed: *seed,
                max_entries: *max_entries,
                ..Default::default()
            };
            let rep = run_check(&loaded, &opts)?;
            Ok((render(&rep, common.json), if rep.all_passed { 0 } else { 1 }))
        }
        Command::Info {
            common,
            precision,
            max_entries,
        } => {
            let loaded = read_game(&common.game)?;
            Ok((render(&run_info(&loaded, *precision, *max_entries), common.json), 0))
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok((stdout, code)) => Outcome {
            stdout,
            stderr: String::new(),
            code,
        },
        Err(e) => {
            let mut stderr = format!("error: {e}\n");
            if let Some(h) = hint(&e) {
                stderr.push_str(&format!("hint: {h}\n"));
            }
            Outcome {
                stdout: String::new(),
                stderr,
                code: e.exit_code(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
states = 1
actions1 = 1
actions2 = 1

[[reward]]
state = 1
i = 1
j = 1
value = "5/2"

[[transition]]
state = 1
i = 1
j = 1
next = ["1"]
"#;

    #[test]
    fn minimal_document() {
        let g = parse_game(MINIMAL).unwrap();
        assert_eq!((g.game.states(), g.game.actions1(), g.game.actions2()), (1, 1, 1));
        assert_eq!(g.game.reward(0, 0, 0), &rat(5, 2));
        assert_eq!(g.initial_state, None);
    }

    #[test]
    fn row_sum_error_names_the_row() {
        let text = MINIMAL.replace("next = [\"1\"]", "next = [\"99/100\"]");
        match parse_game(&text) {
            Err(Error::NotStochastic {
                state: 1,
                i: 1,
                j: 1,
                sum,
            }) => assert_eq!(sum, rat(99, 100)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = MINIMAL.replace("\"5/2\"", "\"5/0\"");
        match parse_game(&text) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 10);
                assert_eq!(field, "reward.value");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("i = 1\nj = 1\nvalue", "i = 2\nj = 1\nvalue");
        assert!(matches!(parse_game(&text), Err(Error::Parse { line: 8, .. })));
        let text = MINIMAL.replace("states = 1", "states = 1\nbogus = 3");
        assert!(matches!(parse_game(&text), Err(Error::Parse { .. })));
        let text = MINIMAL.replace("\"5/2\"", "2.5");
        assert!(matches!(parse_game(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_and_duplicate_entries() {
        let text = MINIMAL.split("[[transition]]").next().unwrap();
        assert!(matches!(parse_game(text), Err(Error::Invalid(m)) if m.contains("transition")));
        let reward = "\n[[reward]]\nstate = 1\ni = 1\nj = 1\nvalue = \"1\"\n";
        let text = format!("{MINIMAL}{reward}");
        let e = parse_game(&text);
        assert!(matches!(e, Err(Error::Parse { line: 18, .. })), "{e:?}");
    }

    #[test]
    fn wrong_next_length() {
        let text = MINIMAL.replace("next = [\"1\"]", "next = [\"1\", \"0\"]");
        assert!(matches!(parse_game(&text), Err(Error::Parse { field, .. }) if field == "transition.next"));
    }

    #[test]
    fn decimal_digit_count() {
        assert_eq!(decimal_digits(10), 6);
        assert_eq!(decimal_digits(20), 9);
    }

    #[test]
    fn discounted_and_value_reports() {
        let g = Game::single_state(&[vec![int(3), int(1)], vec![int(0), int(2)]]).unwrap();
        let loaded = LoadedGame {
            game: g,
            initial_state: None,
            label: Some("g".into()),
        };
        let rep = run_discounted(
            &loaded,
            0,
            &DiscountRate::new(rat(1, 3)).unwrap(),
            8,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((&rep.result.value_estimate - rat(3, 2)).abs() <= pow2_neg(8));
        assert!(rep.human().contains("discounted value"));
        let json: serde_json::Value = serde_json::from_str(&rep.json()).unwrap();
        assert_eq!(json["state"], 1);
        assert!(json["result"]["value_estimate"].is_string());

        let rep = run_value(&loaded, 0, 8, &SolverOptions::default()).unwrap();
        assert!((&rep.result.value_estimate - rat(3, 2)).abs() <= pow2_neg(8));
        assert_eq!(rep.discrepancies, 0);
    }

    #[test]
    fn check_on_random_game_passes() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = generate::random_game(&mut rng, 2, 2, 2, 4);
        let loaded = LoadedGame {
            game: g,
            initial_state: None,
            label: None,
        };
        let rep = run_check(&loaded, &CheckOptions::default()).unwrap();
        assert!(rep.all_passed, "{}", rep.human());
        assert!(rep
            .properties
            .iter()
            .any(|p| p.name == "absorbing_identity" && p.status == Status::Skipped));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip(seed in any::<u64>(), n in 1usize..=3, a in 1usize..=3, b in 1usize..=3, k in proptest::option::of(0usize..3)) {
            use rand::SeedableRng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = generate::random_game(&mut rng, n, a, b, 6).map_rewards(|x| x * rat(-7, 3));
            let k = k.filter(|&k| k < n);
            let text = serialize_game(&g, k, Some("rt"));
            let back = parse_game(&text).unwrap();
            prop_assert_eq!(back, LoadedGame { game: g, initial_state: k, label: Some("rt".to_string()) });
        }
    }
}
