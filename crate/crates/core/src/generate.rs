//! Seeded random instances for tests, examples and `check`.

use num_traits::{One, Zero};
use rand::Rng;

use crate::gamecore::{Game, StationaryStrategy};
use crate::ratlinalg::{rat, RatMatrix, Rational};

/// A probability vector of length `len` with weights drawn from `0..=grain`.
pub fn random_distribution<R: Rng>(rng: &mut R, len: usize, grain: i64) -> Vec<Rational> {
    let w: Vec<i64> = (0..len).map(|_| rng.gen_range(0..=grain)).collect();
    let total: i64 = w.iter().sum();
    if total == 0 {
        let mut v = vec![Rational::zero(); len];
        v[rng.gen_range(0..len)] = Rational::one();
        return v;
    }
    w.into_iter().map(|a| rat(a, total)).collect()
}

/// Rewards in `{0, 1/grain, …, 1}`, random transition rows.
pub fn random_game<R: Rng>(rng: &mut R, n: usize, n_i: usize, n_j: usize, grain: i64) -> Game {
    let cells = n * n_i * n_j;
    let mut rewards = Vec::with_capacity(cells);
    let mut transitions = Vec::with_capacity(cells * n);
    for _ in 0..cells {
        rewards.push(rat(rng.gen_range(0..=grain), grain));
        transitions.extend(random_distribution(rng, n, grain));
    }
    Game::new(n, n_i, n_j, rewards, transitions).expect("generated rows are stochastic")
}

/// State 0 is live; every other state absorbs.
pub fn random_absorbing_game<R: Rng>(rng: &mut R, n: usize, n_i: usize, n_j: usize, grain: i64) -> Game {
    let base = random_game(rng, n, n_i, n_j, grain);
    Game::from_fn(
        n,
        n_i,
        n_j,
        |l, i, j| base.reward(l, i, j).clone(),
        |l, i, j| {
            if l == 0 {
                base.transition(l, i, j).to_vec()
            } else {
                (0..n)
                    .map(|t| if t == l { Rational::one() } else { Rational::zero() })
                    .collect()
            }
        },
    )
    .expect("absorbing rows are stochastic")
}

pub fn random_strategy<R: Rng>(rng: &mut R, n: usize, actions: usize, grain: i64) -> StationaryStrategy {
    StationaryStrategy::new((0..n).map(|_| random_distribution(rng, actions, grain)).collect())
        .expect("generated vectors are distributions")
}

pub fn random_stochastic_matrix<R: Rng>(rng: &mut R, n: usize, grain: i64) -> RatMatrix {
    let rows: Vec<Vec<Rational>> = (0..n).map(|_| random_distribution(rng, n, grain)).collect();
    RatMatrix::from_rows(&rows).unwrap()
}

/// Entries `p/q` with `|p| ≤ bound`, `1 ≤ q ≤ max_den`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64, max_den: i64) -> RatMatrix {
    RatMatrix::from_fn(rows, cols, |_, _| {
        rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=max_den))
    })
}
