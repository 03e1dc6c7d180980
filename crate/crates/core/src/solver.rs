//! Bisection for the discounted value and for the limit value.
//!
//! Both searches run on the game with rewards normalized into `[0,1]`,
//! start from the bracket `[0, 1]` and keep the invariant
//! `sign(lower) ≥ 0 ≥ sign(upper)`. A zero sign moves both ends onto the
//! midpoint. The discounted search reads the sign of `val W_λ^k(z)`; the
//! limit search reads the sign of `F^k(z)` from [`sign_of_f`].

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamecore::{affine_normalize, DiscountRate, Game, Normalized};
use crate::matrixgame::{self, MatrixGame};
use crate::ratlinalg::{pow2_neg, Rational, Sign};
use crate::wgame::{build_w_capped, DeterminantTables, DEFAULT_MAX_ENTRIES};

/// The λ-refinement ladder `λ_t = 2^{-t}` used to read signs near `λ = 0`.
///
/// Rungs start at `first_rung` and double up to `max_depth`; a sign is
/// accepted once `window` consecutive rungs agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderConfig {
    pub first_rung: u32,
    pub window: usize,
    pub max_depth: u32,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            first_rung: 4,
            window: 3,
            max_depth: 256,
        }
    }
}

impl LadderConfig {
    pub fn rungs(&self) -> impl Iterator<Item = u32> + '_ {
        std::iter::successors(Some(self.first_rung.max(1)), |&t| t.checked_mul(2))
            .take_while(move |&t| t <= self.max_depth)
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_entries: u128,
    pub ladder: LadderConfig,
    /// Skip the `λ_r` cross-check when its exponent exceeds this.
    pub lambda_r_max_exponent: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_entries: DEFAULT_MAX_ENTRIES,
            ladder: LadderConfig::default(),
            lambda_r_max_exponent: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BisectionStep {
    #[serde(serialize_with = "ser_rational")]
    pub z: Rational,
    pub sign: Sign,
    #[serde(serialize_with = "ser_rational")]
    pub lower: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub upper: Rational,
}

/// Output of either search, in the original reward scale.
#[derive(Debug, Clone, Serialize)]
pub struct BisectionResult {
    #[serde(serialize_with = "ser_rational")]
    pub value_estimate: Rational,
    /// `upper − lower`; the true value lies in `[estimate, estimate + radius]`.
    #[serde(serialize_with = "ser_rational")]
    pub radius: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub lower: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub upper: Rational,
    pub iterations: usize,
    /// Bits of precision used on the normalized scale.
    pub normalized_bits: u32,
    pub trace: Vec<BisectionStep>,
    /// One entry per step of a limit-value search; empty otherwise.
    pub evidence: Vec<SignEvidence>,
}

impl BisectionResult {
    pub fn discrepancies(&self) -> usize {
        self.evidence.iter().filter(|e| e.discrepancy).count()
    }
}

/// How the sign of `F^k(z)` was decided.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignEvidence {
    #[serde(serialize_with = "ser_rational")]
    pub z: Rational,
    pub sign: Sign,
    /// λ of the last rung read.
    #[serde(serialize_with = "ser_rational")]
    pub lambda_used: Rational,
    pub stabilized: bool,
    /// First rung of the agreeing window.
    pub stabilization_rung: u32,
    pub rungs: Vec<(u32, Sign)>,
    /// `e` with `λ_r = 2^{-e}`.
    pub lambda_r_exponent: u64,
    pub lambda_r_sign: Option<Sign>,
    pub discrepancy: bool,
}

pub(crate) fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Exact `val W_λ^k(z)`.
pub fn val_w(game: &Game, k: usize, lambda: &DiscountRate, z: &Rational) -> Result<Rational> {
    val_w_capped(game, k, lambda, z, DEFAULT_MAX_ENTRIES)
}

pub fn val_w_capped(game: &Game, k: usize, lambda: &DiscountRate, z: &Rational, cap: u128) -> Result<Rational> {
    let w = build_w_capped(game, k, lambda, z, cap)?;
    Ok(matrixgame::value(&MatrixGame::new(w.payoff)?))
}

fn tables_value(tables: &DeterminantTables, z: &Rational) -> Result<Rational> {
    Ok(matrixgame::value(&MatrixGame::new(tables.at(z).payoff)?))
}

/// Smallest `e ≥ 0` with `x ≤ 2^e`.
fn ceil_log2(x: &Rational) -> u32 {
    let mut e = 0;
    let mut p = Rational::one();
    while &p < x {
        p *= Rational::from_integer(2.into());
        e += 1;
    }
    e
}

fn bisect(
    bits: u32,
    mut sign_at: impl FnMut(&Rational) -> Result<Sign>,
) -> Result<(Rational, Rational, Vec<BisectionStep>)> {
    let mut lower = Rational::zero();
    let mut upper = Rational::one();
    let eps = pow2_neg(bits);
    let half = Rational::new(1.into(), 2.into());
    let mut trace = Vec::new();
    while &upper - &lower > eps {
        let z = (&lower + &upper) * &half;
        let sign = sign_at(&z)?;
        if sign != Sign::Negative {
            lower = z.clone();
        }
        if sign != Sign::Positive {
            upper = z.clone();
        }
        trace.push(BisectionStep {
            z,
            sign,
            lower: lower.clone(),
            upper: upper.clone(),
        });
    }
    Ok((lower, upper, trace))
}

fn finish(
    norm: &Normalized,
    bits: u32,
    (lower, upper, trace): (Rational, Rational, Vec<BisectionStep>),
    evidence: Vec<SignEvidence>,
) -> BisectionResult {
    let map = |x: &Rational| norm.to_original(x);
    BisectionResult {
        value_estimate: map(&lower),
        radius: &norm.scale * (&upper - &lower),
        lower: map(&lower),
        upper: map(&upper),
        iterations: trace.len(),
        normalized_bits: bits,
        trace: trace
            .into_iter()
            .map(|s| BisectionStep {
                z: map(&s.z),
                sign: s.sign,
                lower: map(&s.lower),
                upper: map(&s.upper),
            })
            .collect(),
        evidence: evidence
            .into_iter()
            .map(|e| SignEvidence { z: map(&e.z), ..e })
            .collect(),
    }
}

/// `2^{-r}`-approximation of `v_λ^k` (original scale). When the reward span
/// exceeds one, extra bits are spent so the radius still stays below `2^{-r}`.
pub fn discounted_value(game: &Game, k: usize, lambda: &DiscountRate, r: u32) -> Result<BisectionResult> {
    discounted_value_with(game, k, lambda, r, &SolverOptions::default())
}

pub fn discounted_value_with(
    game: &Game,
    k: usize,
    lambda: &DiscountRate,
    r: u32,
    opts: &SolverOptions,
) -> Result<BisectionResult> {
    let norm = affine_normalize(game);
    let bits = r + ceil_log2(&norm.scale);
    let tables = DeterminantTables::new(&norm.game, k, lambda, opts.max_entries)?;
    let run = bisect(bits, |z| Ok(Sign::of(&tables_value(&tables, z)?)))?;
    Ok(finish(&norm, bits, run, Vec::new()))
}

/// `bit(p) = ⌈log₂(p+1)⌉`
fn bit_len(p: &BigInt) -> u64 {
    p.bits()
}

/// Exponent `e` of `λ_r = 2^{-e}` with
/// `e = 4nd(bit(n) + bit(d) + bit(N)) + r·n·d`, `d = max(|I|,|J|)ⁿ` and `N`
/// the common denominator of the game data.
pub fn lambda_r_exponent(game: &Game, r: u32) -> u64 {
    let n = game.states() as u64;
    let d = BigInt::from(game.actions1().max(game.actions2())).pow(game.states() as u32);
    let big_n = game.common_denominator();
    let d_small: u64 = d.clone().try_into().unwrap_or(u64::MAX / 8);
    let bits = bit_len(&BigInt::from(n)) + bit_len(&d) + bit_len(&big_n);
    4u64.saturating_mul(n)
        .saturating_mul(d_small)
        .saturating_mul(bits)
        .saturating_add((r as u64).saturating_mul(n).saturating_mul(d_small))
}

/// Reads signs of `val W_λ^k(z)` with per-λ determinant tables cached, so a
/// bisection pays for each rung's determinants once.
pub struct SignReader<'a> {
    game: &'a Game,
    k: usize,
    r: u32,
    opts: SolverOptions,
    rungs: HashMap<u32, DeterminantTables>,
    lambda_r: Option<(u64, Option<DeterminantTables>)>,
}

impl<'a> SignReader<'a> {
    pub fn new(game: &'a Game, k: usize, r: u32, opts: &SolverOptions) -> Self {
        SignReader {
            game,
            k,
            r,
            opts: opts.clone(),
            rungs: HashMap::new(),
            lambda_r: None,
        }
    }

    /// Sign of `val W_{2^{-t}}^k(z)`.
    pub fn rung_sign(&mut self, t: u32, z: &Rational) -> Result<Sign> {
        if !self.rungs.contains_key(&t) {
            let lambda = DiscountRate::new(pow2_neg(t))?;
            let tables = DeterminantTables::new(self.game, self.k, &lambda, self.opts.max_entries)?;
            self.rungs.insert(t, tables);
        }
        Ok(Sign::of(&tables_value(&self.rungs[&t], z)?))
    }

    fn lambda_r_sign(&mut self, z: &Rational) -> Result<(u64, Option<Sign>)> {
        if self.lambda_r.is_none() {
            let e = lambda_r_exponent(self.game, self.r);
            let tables = if e <= self.opts.lambda_r_max_exponent {
                let lambda = DiscountRate::new(pow2_neg(e as u32))?;
                Some(DeterminantTables::new(
                    self.game,
                    self.k,
                    &lambda,
                    self.opts.max_entries,
                )?)
            } else {
                None
            };
            self.lambda_r = Some((e, tables));
        }
        let (e, tables) = self.lambda_r.as_ref().unwrap();
        let sign = match tables {
            Some(t) => Some(Sign::of(&tables_value(t, z)?)),
            None => None,
        };
        Ok((*e, sign))
    }

    pub fn sign_of_f(&mut self, z: &Rational) -> Result<SignEvidence> {
        let ladder = self.opts.ladder.clone();
        let mut rungs: Vec<(u32, Sign)> = Vec::new();
        for t in ladder.rungs() {
            let s = self.rung_sign(t, z)?;
            rungs.push((t, s));
            if rungs.len() >= ladder.window {
                let tail = &rungs[rungs.len() - ladder.window..];
                if tail.iter().all(|&(_, x)| x == s) {
                    let stabilization_rung = tail[0].0;
                    let (lambda_r_exponent, lambda_r_sign) = self.lambda_r_sign(z)?;
                    return Ok(SignEvidence {
                        z: z.clone(),
                        sign: s,
                        lambda_used: pow2_neg(t),
                        stabilized: true,
                        stabilization_rung,
                        discrepancy: lambda_r_sign.is_some_and(|x| x != s),
                        rungs,
                        lambda_r_exponent,
                        lambda_r_sign,
                    });
                }
            }
        }
        Err(Error::UndecidedSign {
            z: z.clone(),
            window: ladder.window,
            depth: ladder.max_depth,
        })
    }
}

/// Sign of `F^k(z) = lim_{λ→0} val W_λ^k(z)/λⁿ` on the game as given.
/// `r` only feeds the `λ_r` cross-check.
pub fn sign_of_f(game: &Game, k: usize, z: &Rational, r: u32) -> Result<SignEvidence> {
    sign_of_f_with(game, k, z, r, &SolverOptions::default())
}

pub fn sign_of_f_with(game: &Game, k: usize, z: &Rational, r: u32, opts: &SolverOptions) -> Result<SignEvidence> {
    SignReader::new(game, k, r, opts).sign_of_f(z)
}

/// `2^{-r}`-approximation of the value `v^k = lim_{λ→0} v_λ^k`.
pub fn limit_value(game: &Game, k: usize, r: u32) -> Result<BisectionResult> {
    limit_value_with(game, k, r, &SolverOptions::default())
}

pub fn limit_value_with(game: &Game, k: usize, r: u32, opts: &SolverOptions) -> Result<BisectionResult> {
    let norm = affine_normalize(game);
    let bits = r + ceil_log2(&norm.scale);
    let mut reader = SignReader::new(&norm.game, k, bits, opts);
    let mut evidence = Vec::new();
    let run = bisect(bits, |z| {
        let e = reader.sign_of_f(z)?;
        let s = e.sign;
        evidence.push(e);
        Ok(s)
    })?;
    Ok(finish(&norm, bits, run, evidence))
}
