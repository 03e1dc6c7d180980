//! Absorbing games: one live state, every other state absorbs.
//!
//! The live state is moved to index 0 on construction. For such games
//! `val W⁰_λ(z)/λⁿ` coincides, at every finite `λ`, with Kohlberg's
//! pre-limit quotient `(Φ⁰(λ,u(z)) − z)/λ`, `u(z) = (z, v¹, …, v^{n−1})`.
//!
//! The entrywise reduction of `W` to `λ^{n−1}(𝒢⁰_{λ,u(z)} − zU)` needs every
//! absorbing state to pay a constant reward. With non-constant absorbing
//! rewards the entries also depend on the absorbing-state actions, yet the
//! value identity survives: each player can mix independently in each
//! absorbing state, which pins the continuation to `v^ℓ`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamecore::{DiscountRate, Game};
use crate::matrixgame::{self, MatrixGame};
use crate::oracle::{shapley_aux, shapley_operator};
use crate::ratlinalg::{pow, pow2_neg, RatMatrix, Rational, Sign};
use crate::solver::{ser_rational, LadderConfig};
use crate::wgame::{build_w_capped, decode_profile, DEFAULT_MAX_ENTRIES};

#[derive(Debug, Clone)]
pub struct AbsorbingGame {
    game: Game,
    /// `order[s]` is the input state now at index `s`.
    order: Vec<usize>,
}

fn absorbs(game: &Game, k: usize) -> bool {
    (0..game.actions1()).all(|i| (0..game.actions2()).all(|j| game.prob(k, k, i, j).is_one()))
}

/// Live states `k₀` for which every other state absorbs.
pub fn live_state_candidates(game: &Game) -> Vec<usize> {
    (0..game.states())
        .filter(|&k0| (0..game.states()).all(|k| k == k0 || absorbs(game, k)))
        .collect()
}

impl AbsorbingGame {
    /// `k0` is the live state (0-based, in the input labelling).
    pub fn new(game: &Game, k0: usize) -> Result<Self> {
        let n = game.states();
        if k0 >= n {
            return Err(Error::IndexOutOfRange { index: k0, size: n });
        }
        if let Some(k) = (0..n).find(|&k| k != k0 && !absorbs(game, k)) {
            return Err(Error::NotAbsorbing(format!(
                "state {} can be left although state {} is the live state",
                k + 1,
                k0 + 1
            )));
        }
        let order: Vec<usize> = std::iter::once(k0).chain((0..n).filter(|&k| k != k0)).collect();
        Ok(AbsorbingGame {
            game: game.permute_states(&order)?,
            order,
        })
    }

    /// Picks the first admissible live state.
    pub fn detect(game: &Game) -> Result<Self> {
        match live_state_candidates(game).first() {
            Some(&k0) => Self::new(game, k0),
            None => Err(Error::NotAbsorbing("more than one state can be left".to_string())),
        }
    }

    /// The relabelled game, live state at index 0.
    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn permutation(&self) -> &[usize] {
        &self.order
    }

    pub fn live_state(&self) -> usize {
        self.order[0]
    }

    /// True when every absorbing state pays the same reward for all actions.
    pub fn constant_absorbing_rewards(&self) -> bool {
        let g = &self.game;
        (1..g.states()).all(|l| {
            let first = g.reward(l, 0, 0);
            (0..g.actions1()).all(|i| (0..g.actions2()).all(|j| g.reward(l, i, j) == first))
        })
    }
}

/// `v^ℓ = val (g(ℓ,i,j))` for the absorbing states, in relabelled order.
pub fn absorbed_values(game: &AbsorbingGame) -> Vec<Rational> {
    (1..game.game.states())
        .map(|l| matrixgame::value(&MatrixGame::from(game.game.reward_matrix(l))))
        .collect()
}

/// `u(z) = (z, v¹, …)`.
pub fn continuation(game: &AbsorbingGame, z: &Rational) -> Vec<Rational> {
    std::iter::once(z.clone()).chain(absorbed_values(game)).collect()
}

/// `(Φ⁰(λ,u(z)) − z)/λ`
pub fn kohlberg_quotient(game: &AbsorbingGame, lambda: &DiscountRate, z: &Rational) -> Result<Rational> {
    let phi = shapley_operator(&game.game, lambda, &continuation(game, z))?;
    Ok((&phi[0] - z) / lambda.value())
}

/// Sign of `T(z)` read on the ladder `λ_t = 2^{-t}`: the first sign shared by
/// `window` consecutive rungs, with the first rung of that window.
pub fn kohlberg_sign(game: &AbsorbingGame, z: &Rational, ladder: &LadderConfig) -> Result<(Sign, u32)> {
    let mut seen: Vec<(u32, Sign)> = Vec::new();
    for t in ladder.rungs() {
        let s = Sign::of(&kohlberg_quotient(game, &DiscountRate::new(pow2_neg(t))?, z)?);
        seen.push((t, s));
        if seen.len() >= ladder.window {
            let tail = &seen[seen.len() - ladder.window..];
            if tail.iter().all(|&(_, x)| x == s) {
                return Ok((s, tail[0].0));
            }
        }
    }
    Err(Error::UndecidedSign {
        z: z.clone(),
        window: ladder.window,
        depth: ladder.max_depth,
    })
}

/// `λ^{n−1}(𝒢⁰_{λ,u(z)} − zU)`
pub fn reduced_w(game: &AbsorbingGame, lambda: &DiscountRate, z: &Rational) -> Result<RatMatrix> {
    let aux = shapley_aux(&game.game, 0, lambda, &continuation(game, z))?;
    let c = pow(lambda.value(), game.game.states() - 1);
    Ok(aux.map(|x| &c * (x - z)))
}

/// First `W` entry that differs from its reduced counterpart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryMismatch {
    pub row_profile: Vec<usize>,
    pub col_profile: Vec<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub w_entry: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub reduced_entry: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Dependence {
    /// Every entry equals the reduced entry at `(𝐢⁰, 𝐣⁰)`.
    Holds,
    Violated(EntryMismatch),
    /// Some absorbing state has non-constant rewards.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub z: Rational,
    /// `val W⁰_λ(z) / λⁿ`
    #[serde(serialize_with = "ser_rational")]
    pub w_side: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub quotient: Rational,
    pub dependence: Dependence,
}

impl IdentityReport {
    pub fn value_identity_holds(&self) -> bool {
        self.w_side == self.quotient
    }

    pub fn holds(&self) -> bool {
        self.value_identity_holds() && !matches!(self.dependence, Dependence::Violated(_))
    }

    /// Description of the first failure, if any.
    pub fn first_violation(&self) -> Option<String> {
        if !self.value_identity_holds() {
            return Some(format!(
                "val W/λⁿ = {} but (Φ(λ,u(z)) − z)/λ = {}",
                self.w_side, self.quotient
            ));
        }
        match &self.dependence {
            Dependence::Violated(m) => Some(format!(
                "W[{:?},{:?}] = {} but the reduced entry is {}",
                m.row_profile.iter().map(|a| a + 1).collect::<Vec<_>>(),
                m.col_profile.iter().map(|a| a + 1).collect::<Vec<_>>(),
                m.w_entry,
                m.reduced_entry
            )),
            _ => None,
        }
    }
}

/// Checks `val W⁰_λ(z)/λⁿ = (Φ⁰(λ,u(z)) − z)/λ` exactly and, when the
/// absorbing rewards are constant, that `W` only depends on `(𝐢⁰, 𝐣⁰)`.
pub fn check_f_equals_t(game: &AbsorbingGame, lambda: &DiscountRate, z: &Rational) -> Result<IdentityReport> {
    check_f_equals_t_capped(game, lambda, z, DEFAULT_MAX_ENTRIES)
}

pub fn check_f_equals_t_capped(
    game: &AbsorbingGame,
    lambda: &DiscountRate,
    z: &Rational,
    cap: u128,
) -> Result<IdentityReport> {
    let g = &game.game;
    let n = g.states();
    let w = build_w_capped(g, 0, lambda, z, cap)?.payoff;
    let w_side = matrixgame::value(&MatrixGame::new(w.clone())?) / pow(lambda.value(), n);
    let quotient = kohlberg_quotient(game, lambda, z)?;

    let dependence = if !game.constant_absorbing_rewards() {
        Dependence::NotApplicable
    } else {
        let reduced = reduced_w(game, lambda, z)?;
        let mut found = Dependence::Holds;
        'scan: for r in 0..w.rows() {
            let i_vec = decode_profile(r, g.actions1(), n);
            for c in 0..w.cols() {
                let j_vec = decode_profile(c, g.actions2(), n);
                let want = reduced.get(i_vec[0], j_vec[0]);
                if w.get(r, c) != want {
                    found = Dependence::Violated(EntryMismatch {
                        row_profile: i_vec,
                        col_profile: j_vec,
                        w_entry: w.get(r, c).clone(),
                        reduced_entry: want.clone(),
                    });
                    break 'scan;
                }
            }
        }
        found
    };

    Ok(IdentityReport {
        lambda: lambda.value().clone(),
        z: z.clone(),
        w_side,
        quotient,
        dependence,
    })
}

/// Distinct rows, then distinct columns, of `m` (first occurrences kept).
pub fn dedup(m: &RatMatrix) -> RatMatrix {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for r in 0..m.rows() {
        if !rows.iter().any(|x| x.as_slice() == m.row(r)) {
            rows.push(m.row(r).to_vec());
        }
    }
    let t = RatMatrix::from_rows(&rows).expect("non-empty rows").transpose();
    let mut cols: Vec<Vec<Rational>> = Vec::new();
    for c in 0..t.rows() {
        if !cols.iter().any(|x| x.as_slice() == t.row(c)) {
            cols.push(t.row(c).to_vec());
        }
    }
    RatMatrix::from_rows(&cols).expect("non-empty columns").transpose()
}

/// `λ^{n−1}` times `val(𝒢⁰_{λ,u(z)} − zU)` recovered through the affine rule.
pub fn reduced_value(game: &AbsorbingGame, lambda: &DiscountRate, z: &Rational) -> Result<Rational> {
    let aux = shapley_aux(&game.game, 0, lambda, &continuation(game, z))?;
    let c = pow(lambda.value(), game.game.states() - 1);
    let shifted = matrixgame::affine_transform(&MatrixGame::from(aux), &Rational::one(), &-z)?;
    let v = matrixgame::value(&matrixgame::affine_transform(&shifted, &c, &Rational::zero())?);
    Ok(v)
}
