//! The parameterized matrix games `W_λ^k(z)`.
//!
//! Rows are indexed by Player 1's pure stationary strategies `𝐢 ∈ Iⁿ`,
//! columns by Player 2's `𝐣 ∈ Jⁿ`, both in mixed radix with state 0 as the
//! most significant digit. The entry at `(𝐢,𝐣)` is `d^k_λ(𝐢,𝐣) − z·d⁰_λ(𝐢,𝐣)`
//! where `d⁰ = det(Id − (1−λ)Q(𝐢,𝐣))` and `d^k` is the same determinant with
//! column `k` replaced by `λ·g(𝐢,𝐣)`.
//!
//! The matrix grows like `|I|ⁿ × |J|ⁿ`, so construction is guarded by an
//! entry cap.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gamecore::{expected_reward, resolvent_matrix, transition_matrix, DiscountRate, Game, StationaryStrategy};
use crate::ratlinalg::{pow, RatMatrix, Rational};

pub const DEFAULT_MAX_ENTRIES: u128 = 1_000_000;

/// Number of pure stationary strategies with `actions` choices in each of `states`.
pub fn profile_count(actions: usize, states: usize) -> u128 {
    (actions as u128).saturating_pow(states as u32)
}

/// Mixed-radix decoding, state 0 most significant.
pub fn decode_profile(mut index: usize, actions: usize, states: usize) -> Vec<usize> {
    let mut out = vec![0; states];
    for slot in out.iter_mut().rev() {
        *slot = index % actions;
        index /= actions;
    }
    out
}

pub fn encode_profile(profile: &[usize], actions: usize) -> usize {
    profile.iter().fold(0, |acc, &a| acc * actions + a)
}

/// Fails with [`Error::ResourceCap`] when `W` would exceed `cap` entries.
pub fn check_size(game: &Game, cap: u128) -> Result<(usize, usize)> {
    let rows = profile_count(game.actions1(), game.states());
    let cols = profile_count(game.actions2(), game.states());
    let entries = rows.saturating_mul(cols);
    if entries > cap {
        return Err(Error::ResourceCap { entries, cap });
    }
    Ok((rows as usize, cols as usize))
}

fn check_state(game: &Game, k: usize) -> Result<()> {
    if k >= game.states() {
        return Err(Error::IndexOutOfRange {
            index: k,
            size: game.states(),
        });
    }
    Ok(())
}

/// `Q(𝐢,𝐣)` and `g(𝐢,𝐣)` for a pure profile.
fn pure_chain(game: &Game, i_vec: &[usize], j_vec: &[usize]) -> (RatMatrix, Vec<Rational>) {
    let n = game.states();
    let q = RatMatrix::from_fn(n, n, |l, t| game.prob(t, l, i_vec[l], j_vec[l]).clone());
    let g = (0..n).map(|l| game.reward(l, i_vec[l], j_vec[l]).clone()).collect();
    (q, g)
}

fn check_pure(game: &Game, i_vec: &[usize], j_vec: &[usize]) -> Result<()> {
    let n = game.states();
    if i_vec.len() != n || j_vec.len() != n {
        return Err(Error::Dimension(format!(
            "pure profile must have {n} entries per player"
        )));
    }
    if let Some(&a) = i_vec.iter().find(|&&a| a >= game.actions1()) {
        return Err(Error::IndexOutOfRange {
            index: a,
            size: game.actions1(),
        });
    }
    if let Some(&b) = j_vec.iter().find(|&&b| b >= game.actions2()) {
        return Err(Error::IndexOutOfRange {
            index: b,
            size: game.actions2(),
        });
    }
    Ok(())
}

/// `d⁰_λ(𝐢,𝐣) = det(Id − (1−λ)Q(𝐢,𝐣))`; at least `λⁿ`.
pub fn d0(game: &Game, i_vec: &[usize], j_vec: &[usize], lambda: &DiscountRate) -> Result<Rational> {
    check_pure(game, i_vec, j_vec)?;
    let (q, _) = pure_chain(game, i_vec, j_vec);
    resolvent_matrix(&q, lambda).det()
}

/// `d^k_λ(𝐢,𝐣)`: column `k` of `Id − (1−λ)Q(𝐢,𝐣)` replaced by `λ·g(𝐢,𝐣)`.
pub fn dk(game: &Game, k: usize, i_vec: &[usize], j_vec: &[usize], lambda: &DiscountRate) -> Result<Rational> {
    check_state(game, k)?;
    check_pure(game, i_vec, j_vec)?;
    let (q, g) = pure_chain(game, i_vec, j_vec);
    column_replaced_det(&q, &g, k, lambda)
}

fn column_replaced_det(q: &RatMatrix, g: &[Rational], k: usize, lambda: &DiscountRate) -> Result<Rational> {
    let col: Vec<Rational> = g.iter().map(|v| lambda.value() * v).collect();
    resolvent_matrix(q, lambda).replace_column(k, &col)?.det()
}

/// `d⁰_λ(x,y)` for mixed stationary strategies.
pub fn d0_mixed(
    game: &Game,
    x: &StationaryStrategy,
    y: &StationaryStrategy,
    lambda: &DiscountRate,
) -> Result<Rational> {
    resolvent_matrix(&transition_matrix(game, x, y)?, lambda).det()
}

/// `d^k_λ(x,y)` for mixed stationary strategies.
pub fn dk_mixed(
    game: &Game,
    k: usize,
    x: &StationaryStrategy,
    y: &StationaryStrategy,
    lambda: &DiscountRate,
) -> Result<Rational> {
    check_state(game, k)?;
    let q = transition_matrix(game, x, y)?;
    let g = expected_reward(game, x, y)?;
    column_replaced_det(&q, &g, k, lambda)
}

/// `W_λ^k(z)` together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WMatrix {
    pub payoff: RatMatrix,
    pub k: usize,
    pub lambda: Rational,
    pub z: Rational,
}

/// The two determinant grids behind `W_λ^k(·)`. They do not depend on `z`,
/// so a bisection builds them once per `λ` and then evaluates
/// `dk − z·d0` per step.
#[derive(Debug, Clone)]
pub struct DeterminantTables {
    rows: usize,
    cols: usize,
    k: usize,
    lambda: Rational,
    d0: Vec<Rational>,
    dk: Vec<Rational>,
}

impl DeterminantTables {
    pub fn new(game: &Game, k: usize, lambda: &DiscountRate, cap: u128) -> Result<Self> {
        check_state(game, k)?;
        let (rows, cols) = check_size(game, cap)?;
        let n = game.states();
        let mut d0 = Vec::with_capacity(rows * cols);
        let mut dk = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let i_vec = decode_profile(r, game.actions1(), n);
            for c in 0..cols {
                let j_vec = decode_profile(c, game.actions2(), n);
                let (q, g) = pure_chain(game, &i_vec, &j_vec);
                d0.push(resolvent_matrix(&q, lambda).det()?);
                dk.push(column_replaced_det(&q, &g, k, lambda)?);
            }
        }
        Ok(DeterminantTables {
            rows,
            cols,
            k,
            lambda: lambda.value().clone(),
            d0,
            dk,
        })
    }

    pub fn d0_matrix(&self) -> RatMatrix {
        RatMatrix::new(self.rows, self.cols, self.d0.clone()).unwrap()
    }

    pub fn dk_matrix(&self) -> RatMatrix {
        RatMatrix::new(self.rows, self.cols, self.dk.clone()).unwrap()
    }

    pub fn at(&self, z: &Rational) -> WMatrix {
        let data = self.dk.iter().zip(&self.d0).map(|(a, b)| a - z * b).collect();
        WMatrix {
            payoff: RatMatrix::new(self.rows, self.cols, data).unwrap(),
            k: self.k,
            lambda: self.lambda.clone(),
            z: z.clone(),
        }
    }
}

/// `W_λ^k(z)` by direct determinant evaluation, with the default entry cap.
pub fn build_w(game: &Game, k: usize, lambda: &DiscountRate, z: &Rational) -> Result<WMatrix> {
    build_w_capped(game, k, lambda, z, DEFAULT_MAX_ENTRIES)
}

pub fn build_w_capped(game: &Game, k: usize, lambda: &DiscountRate, z: &Rational, cap: u128) -> Result<WMatrix> {
    Ok(DeterminantTables::new(game, k, lambda, cap)?.at(z))
}

/// `W_λ^k(z) = (−1)^{k+1} det⊗ D^{k+1} − z det⊗ D⁰` (with 0-based `k`), where
/// `D` is the `n × (n+1)` block array
/// `[−λG^ℓ | δ_{ℓℓ'}U − (1−λ)Q^{ℓ,ℓ'}]` and `D^m` drops block column `m`.
///
/// In `det⊗` the Kronecker factors are ordered by block row (state), which
/// is what makes row/column indices line up with the mixed-radix profile
/// order.
pub fn build_w_kronecker(game: &Game, k: usize, lambda: &DiscountRate, z: &Rational) -> Result<WMatrix> {
    build_w_kronecker_capped(game, k, lambda, z, DEFAULT_MAX_ENTRIES)
}

pub fn build_w_kronecker_capped(
    game: &Game,
    k: usize,
    lambda: &DiscountRate,
    z: &Rational,
    cap: u128,
) -> Result<WMatrix> {
    check_state(game, k)?;
    check_size(game, cap)?;
    let blocks = block_array(game, lambda);
    let d0 = det_kron(&drop_block_column(&blocks, 0));
    let dk = det_kron(&drop_block_column(&blocks, k + 1));
    // paper-style index k+1 is odd when the 0-based k is even
    let sign = if k.is_multiple_of(2) { -Rational::one() } else { Rational::one() };
    let payoff = RatMatrix::from_fn(dk.rows(), dk.cols(), |r, c| &sign * dk.get(r, c) - z * d0.get(r, c));
    Ok(WMatrix {
        payoff,
        k,
        lambda: lambda.value().clone(),
        z: z.clone(),
    })
}

/// The `n × (n+1)` array of `|I|×|J|` blocks.
pub fn block_array(game: &Game, lambda: &DiscountRate) -> Vec<Vec<RatMatrix>> {
    let n = game.states();
    let lam = lambda.value();
    let keep = Rational::one() - lam;
    (0..n)
        .map(|l| {
            let mut row = Vec::with_capacity(n + 1);
            row.push(game.reward_matrix(l).map(|g| -(lam * g)));
            for t in 0..n {
                let diag = if t == l { Rational::one() } else { Rational::zero() };
                row.push(game.transition_block(l, t).map(|q| &diag - &keep * q));
            }
            row
        })
        .collect()
}

pub fn drop_block_column(blocks: &[Vec<RatMatrix>], col: usize) -> Vec<Vec<RatMatrix>> {
    blocks
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|&(c, _)| c != col)
                .map(|(_, m)| m.clone())
                .collect()
        })
        .collect()
}

/// Leibniz expansion of a square block array with products replaced by
/// Kronecker products; factor `ℓ` comes from block row `ℓ`.
pub fn det_kron(blocks: &[Vec<RatMatrix>]) -> RatMatrix {
    let n = blocks.len();
    let (p, q) = (blocks[0][0].rows(), blocks[0][0].cols());
    let mut acc = RatMatrix::zeros(p.pow(n as u32), q.pow(n as u32));
    for (perm, odd) in permutations(n) {
        let mut term = blocks[0][perm[0]].clone();
        for (row, &col) in blocks.iter().zip(&perm).skip(1) {
            term = term.kron(&row[col]);
        }
        if odd {
            term = term.map(|x| -x);
        }
        acc = acc.add(&term).unwrap();
    }
    acc
}

/// All permutations of `0..n` with their parity (`true` for odd).
fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, bool)>) {
        let n = used.len();
        if prefix.len() == n {
            let inversions = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|&(a, b)| prefix[a] > prefix[b])
                .count();
            out.push((prefix.clone(), inversions % 2 == 1));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `x̂ · W`: the row player's product strategy against every column.
pub fn product_row(w: &RatMatrix, x: &StationaryStrategy, actions: usize) -> Vec<Rational> {
    let n = x.states();
    let weights: Vec<Rational> = (0..w.rows())
        .map(|r| x.product_weight(&decode_profile(r, actions, n)))
        .collect();
    (0..w.cols())
        .map(|c| (0..w.rows()).map(|r| &weights[r] * w.get(r, c)).sum())
        .collect()
}

/// `λⁿ`, the lower bound on every `d⁰`.
pub fn lambda_pow_n(game: &Game, lambda: &DiscountRate) -> Rational {
    pow(lambda.value(), game.states())
}
