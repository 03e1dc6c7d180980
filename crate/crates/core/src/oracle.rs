//! Independent references for the bisection solvers: the Shapley operator,
//! certified value iteration, and brute force over pure stationary
//! strategies for one-player games.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gamecore::{discounted_payoff, DiscountRate, Game, StationaryStrategy};
use crate::matrixgame::{self, MatrixGame};
use crate::ratlinalg::{pow2_neg, RatMatrix, Rational};
use crate::solver::LadderConfig;
use crate::wgame::decode_profile;

/// `𝒢^ℓ_{λ,u}[i,j] = λ·g(ℓ,i,j) + (1−λ)·Σ_{ℓ'} q(ℓ'|ℓ,i,j)·u^{ℓ'}`
pub fn shapley_aux(game: &Game, state: usize, lambda: &DiscountRate, u: &[Rational]) -> Result<RatMatrix> {
    if u.len() != game.states() {
        return Err(Error::Dimension(format!(
            "continuation vector of length {} for {} states",
            u.len(),
            game.states()
        )));
    }
    if state >= game.states() {
        return Err(Error::IndexOutOfRange {
            index: state,
            size: game.states(),
        });
    }
    let lam = lambda.value();
    let keep = Rational::one() - lam;
    Ok(RatMatrix::from_fn(game.actions1(), game.actions2(), |i, j| {
        let cont: Rational = game.transition(state, i, j).iter().zip(u).map(|(p, w)| p * w).sum();
        lam * game.reward(state, i, j) + &keep * cont
    }))
}

/// `Φ(λ,u)`: the value of `𝒢^ℓ_{λ,u}` in every state.
pub fn shapley_operator(game: &Game, lambda: &DiscountRate, u: &[Rational]) -> Result<Vec<Rational>> {
    (0..game.states())
        .map(|l| Ok(matrixgame::value(&MatrixGame::new(shapley_aux(game, l, lambda, u)?)?)))
        .collect()
}

pub fn sup_norm_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueIteration {
    pub values: Vec<Rational>,
    /// Certified bound on `‖values − v_λ‖_∞`; never above the requested tolerance.
    pub error_bound: Rational,
    pub iterations: usize,
}

/// Iterates `u ↦ Φ(λ,u)` from `u = 0` until the contraction bound certifies
/// `‖u − v_λ‖_∞ ≤ tol`.
///
/// Iterates are rounded to the dyadic grid `2^{-p}` to stop denominators from
/// compounding. With rounding error `δ` and step `Δ = ‖u_{t+1} − u_t‖`, the
/// new iterate satisfies `‖u_{t+1} − v‖ ≤ (1−λ)(Δ+δ)/λ + δ`; `p` is chosen so
/// that `δ ≤ λ·tol/8`.
pub fn value_iteration(game: &Game, lambda: &DiscountRate, tol: &Rational) -> Result<ValueIteration> {
    if !tol.is_positive() {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let lam = lambda.value();
    let keep = Rational::one() - lam;
    let target = lam * tol / Rational::from_integer(8.into());
    let mut p = 0u32;
    while pow2_neg(p) > target {
        p += 1;
    }
    let delta = pow2_neg(p);
    let grid = Rational::from_integer(BigInt::one() << p);

    let mut u = vec![Rational::zero(); game.states()];
    let mut iterations = 0;
    loop {
        let next: Vec<Rational> = shapley_operator(game, lambda, &u)?
            .iter()
            .map(|v| round_to_grid(v, &grid))
            .collect();
        iterations += 1;
        let step = sup_norm_distance(&next, &u);
        let bound = &keep * (&step + &delta) / lam + &delta;
        u = next;
        if &bound <= tol {
            return Ok(ValueIteration {
                values: u,
                error_bound: bound,
                iterations,
            });
        }
    }
}

/// Nearest multiple of `1/grid`, ties toward +∞.
fn round_to_grid(v: &Rational, grid: &Rational) -> Rational {
    let half = Rational::new(1.into(), 2.into());
    (v * grid + half).floor() / grid
}

/// Optimal discounted payoff from `k` over pure stationary strategies when
/// one player has a single action (Player 1 maximizes, Player 2 minimizes).
pub fn mdp_brute_force(game: &Game, k: usize, lambda: &DiscountRate) -> Result<Rational> {
    one_player_extremum(game, k, |x, y| Ok(discounted_payoff(game, x, y, lambda)?[k].clone()))
}

/// Same as [`mdp_brute_force`] for the undiscounted limit: each pure
/// profile's `lim_{λ→0} γ_λ^k` is read off the λ-ladder `2^{-t}` once
/// `window` consecutive rungs agree within `tol`.
pub fn mdp_limit_brute_force(game: &Game, k: usize, ladder: &LadderConfig, tol: &Rational) -> Result<Rational> {
    one_player_extremum(game, k, |x, y| profile_limit(game, k, x, y, ladder, tol))
}

fn profile_limit(
    game: &Game,
    k: usize,
    x: &StationaryStrategy,
    y: &StationaryStrategy,
    ladder: &LadderConfig,
    tol: &Rational,
) -> Result<Rational> {
    let mut seen: Vec<Rational> = Vec::new();
    for t in ladder.rungs() {
        let lambda = DiscountRate::new(pow2_neg(t))?;
        seen.push(discounted_payoff(game, x, y, &lambda)?[k].clone());
        if seen.len() >= ladder.window {
            let tail = &seen[seen.len() - ladder.window..];
            let spread = tail.iter().max().unwrap() - tail.iter().min().unwrap();
            if &spread <= tol {
                return Ok(tail.last().unwrap().clone());
            }
        }
    }
    Err(Error::Internal(format!(
        "discounted payoff did not settle within {tol} by ladder depth {}",
        ladder.max_depth
    )))
}

fn one_player_extremum(
    game: &Game,
    k: usize,
    mut payoff: impl FnMut(&StationaryStrategy, &StationaryStrategy) -> Result<Rational>,
) -> Result<Rational> {
    let n = game.states();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, size: n });
    }
    let (maximize, actions) = match (game.actions1(), game.actions2()) {
        (_, 1) => (true, game.actions1()),
        (1, b) => (false, b),
        (a, b) => {
            return Err(Error::Invalid(format!(
                "brute force needs a one-player game, both players have actions ({a}x{b})"
            )))
        }
    };
    let count = actions
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Invalid("too many profiles".into()))?;
    let idle = StationaryStrategy::pure(&vec![0; n], 1);
    let mut best: Option<Rational> = None;
    for idx in 0..count {
        let s = StationaryStrategy::pure(&decode_profile(idx, actions, n), actions);
        let v = if maximize {
            payoff(&s, &idle)?
        } else {
            payoff(&idle, &s)?
        };
        best = Some(match best {
            None => v,
            Some(b) if (maximize && v > b) || (!maximize && v < b) => v,
            Some(b) => b,
        });
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::ratlinalg::{int, rat};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lam(p: i64, q: i64) -> DiscountRate {
        DiscountRate::new(rat(p, q)).unwrap()
    }

    fn cycle() -> Game {
        Game::from_fn(
            2,
            1,
            1,
            |l, _, _| int(if l == 0 { 1 } else { 0 }),
            |l, _, _| {
                if l == 0 {
                    vec![int(0), int(1)]
                } else {
                    vec![int(1), int(0)]
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn operator_examples() {
        let g = Game::single_state(&[vec![int(3), int(1)], vec![int(0), int(2)]]).unwrap();
        assert_eq!(shapley_operator(&g, &lam(1, 1), &[int(0)]).unwrap(), vec![rat(3, 2)]);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = generate::random_game(&mut rng, 3, 2, 2, 4).map_rewards(|_| rat(2, 5));
        let u = vec![rat(2, 5); 3];
        assert_eq!(shapley_operator(&c, &lam(1, 3), &u).unwrap(), u);

        assert!(shapley_operator(&c, &lam(1, 3), &[int(0)]).is_err());
    }

    #[test]
    fn value_iteration_examples() {
        let tol = pow2_neg(12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = generate::random_game(&mut rng, 2, 2, 2, 4).map_rewards(|_| rat(-3, 4));
        let vi = value_iteration(&c, &lam(1, 4), &tol).unwrap();
        assert!(vi.values.iter().all(|v| (v - rat(-3, 4)).abs() <= tol));

        let g = Game::single_state(&[vec![int(3), int(1)], vec![int(0), int(2)]]).unwrap();
        let vi = value_iteration(&g, &lam(1, 5), &tol).unwrap();
        assert!((&vi.values[0] - rat(3, 2)).abs() <= tol);

        let vi = value_iteration(&cycle(), &lam(1, 2), &tol).unwrap();
        assert!((&vi.values[0] - rat(2, 3)).abs() <= tol);
        assert!((&vi.values[1] - rat(1, 3)).abs() <= tol);
        assert!(vi.error_bound <= tol);

        assert!(value_iteration(&g, &lam(1, 2), &int(0)).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let p = StationaryStrategy::pure(&[0, 0], 1);
        let h = lam(1, 2);
        assert_eq!(
            mdp_brute_force(&cycle(), 0, &h).unwrap(),
            discounted_payoff(&cycle(), &p, &p, &h).unwrap()[0]
        );

        // state 0: action 0 pays 1 and stays, action 1 pays 0 and moves to 1;
        // state 1: action 0 pays 1/2 and stays, action 1 pays 0 and moves to 0.
        // Best: stay in 0, leave 1; at λ = 1/3 state 1 gets (1-λ)·1 = 2/3.
        let g = Game::from_fn(
            2,
            2,
            1,
            |l, i, _| match (l, i) {
                (0, 0) => int(1),
                (1, 0) => rat(1, 2),
                _ => int(0),
            },
            |l, i, _| match (l, i) {
                (0, 0) | (1, 1) => vec![int(1), int(0)],
                _ => vec![int(0), int(1)],
            },
        )
        .unwrap();
        assert_eq!(mdp_brute_force(&g, 0, &lam(1, 3)).unwrap(), int(1));
        assert_eq!(mdp_brute_force(&g, 1, &lam(1, 3)).unwrap(), rat(2, 3));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = generate::random_game(&mut rng, 2, 1, 3, 4).map_rewards(|_| rat(7, 3));
        assert_eq!(mdp_brute_force(&c, 1, &lam(1, 6)).unwrap(), rat(7, 3));

        let two = generate::random_game(&mut rng, 2, 2, 2, 4);
        assert!(matches!(mdp_brute_force(&two, 0, &h), Err(Error::Invalid(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn operator_is_a_contraction(seed in any::<u64>(), l in 1i64..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = generate::random_game(&mut rng, 2, 2, 2, 5);
            let lambda = lam(1, l);
            let u: Vec<Rational> = (0..2).map(|_| generate::random_distribution(&mut rng, 1, 3)[0].clone() * int(2) - rat(1, 3)).collect();
            let w = generate::random_distribution(&mut rng, 2, 7);
            let a = shapley_operator(&g, &lambda, &u).unwrap();
            let b = shapley_operator(&g, &lambda, &w).unwrap();
            let keep = Rational::one() - lambda.value();
            prop_assert!(sup_norm_distance(&a, &b) <= keep * sup_norm_distance(&u, &w));
        }

        #[test]
        fn operator_is_monotone(seed in any::<u64>(), bumps in proptest::collection::vec(0i64..=4, 3)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = generate::random_game(&mut rng, 3, 2, 2, 4);
            let lambda = lam(1, 3);
            let u = generate::random_distribution(&mut rng, 3, 5);
            let w: Vec<Rational> = u.iter().zip(&bumps).map(|(x, &b)| x + rat(b, 5)).collect();
            let a = shapley_operator(&g, &lambda, &u).unwrap();
            let b = shapley_operator(&g, &lambda, &w).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
        }

        #[test]
        fn fixed_point_residual(seed in any::<u64>(), l in 2i64..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = generate::random_game(&mut rng, 2, 2, 2, 4);
            let lambda = lam(1, l);
            let tol = pow2_neg(10);
            let vi = value_iteration(&g, &lambda, &tol).unwrap();
            let next = shapley_operator(&g, &lambda, &vi.values).unwrap();
            prop_assert!(sup_norm_distance(&next, &vi.values) <= int(2) * &tol);
        }

        #[test]
        fn mdp_agrees_with_value_iteration(seed in any::<u64>(), k in 0usize..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = generate::random_game(&mut rng, 2, 3, 1, 4);
            let lambda = lam(1, 4);
            let tol = pow2_neg(12);
            let vi = value_iteration(&g, &lambda, &tol).unwrap();
            prop_assert!((mdp_brute_force(&g, k, &lambda).unwrap() - &vi.values[k]).abs() <= tol);
        }
    }
}
