//! The stochastic game model and what a pair of stationary strategies
//! induces: the transition matrix `Q(x,y)`, expected rewards `g(x,y)` and the
//! normalized discounted payoff `γ_λ(x,y) = λ(Id − (1−λ)Q)⁻¹ g`.
//!
//! States and actions are 0-based in this API. Action sets are the same in
//! every state.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratlinalg::{lcm_denominators, RatMatrix, Rational};

/// A finite zero-sum stochastic game `(K, I, J, g, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    n: usize,
    n_i: usize,
    n_j: usize,
    /// `g(ℓ,i,j)` at `(ℓ·nI + i)·nJ + j`
    rewards: Vec<Rational>,
    /// `q(ℓ'|ℓ,i,j)` at `((ℓ·nI + i)·nJ + j)·n + ℓ'`
    transitions: Vec<Rational>,
}

impl Game {
    pub fn new(n: usize, n_i: usize, n_j: usize, rewards: Vec<Rational>, transitions: Vec<Rational>) -> Result<Self> {
        if n == 0 || n_i == 0 || n_j == 0 {
            return Err(Error::Invalid(format!(
                "states and action counts must be positive (got n={n}, nI={n_i}, nJ={n_j})"
            )));
        }
        if rewards.len() != n * n_i * n_j {
            return Err(Error::Dimension(format!(
                "{} rewards for {n}x{n_i}x{n_j}",
                rewards.len()
            )));
        }
        if transitions.len() != n * n_i * n_j * n {
            return Err(Error::Dimension(format!(
                "{} transition probabilities for {n}x{n_i}x{n_j}x{n}",
                transitions.len()
            )));
        }
        let game = Game {
            n,
            n_i,
            n_j,
            rewards,
            transitions,
        };
        game.validate()?;
        Ok(game)
    }

    /// Builds a game from per-cell closures; `transition(ℓ,i,j)` returns the
    /// distribution over the next state.
    pub fn from_fn(
        n: usize,
        n_i: usize,
        n_j: usize,
        mut reward: impl FnMut(usize, usize, usize) -> Rational,
        mut transition: impl FnMut(usize, usize, usize) -> Vec<Rational>,
    ) -> Result<Self> {
        let mut rewards = Vec::with_capacity(n * n_i * n_j);
        let mut transitions = Vec::with_capacity(n * n_i * n_j * n);
        for l in 0..n {
            for i in 0..n_i {
                for j in 0..n_j {
                    rewards.push(reward(l, i, j));
                    let row = transition(l, i, j);
                    if row.len() != n {
                        return Err(Error::Dimension(format!(
                            "transition row of length {} for {n} states",
                            row.len()
                        )));
                    }
                    transitions.extend(row);
                }
            }
        }
        Game::new(n, n_i, n_j, rewards, transitions)
    }

    /// A one-state game with the given reward matrix.
    pub fn single_state(payoff: &[Vec<Rational>]) -> Result<Self> {
        let m = RatMatrix::from_rows(payoff)?;
        Game::from_fn(
            1,
            m.rows(),
            m.cols(),
            |_, i, j| m.get(i, j).clone(),
            |_, _, _| vec![Rational::one()],
        )
    }

    fn validate(&self) -> Result<()> {
        for l in 0..self.n {
            for i in 0..self.n_i {
                for j in 0..self.n_j {
                    let row = self.transition(l, i, j);
                    if row.iter().any(Signed::is_negative) {
                        return Err(Error::Invalid(format!(
                            "negative transition probability at state {}, i {}, j {}",
                            l + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                    let sum: Rational = row.iter().sum();
                    if !sum.is_one() {
                        return Err(Error::NotStochastic {
                            state: l + 1,
                            i: i + 1,
                            j: j + 1,
                            sum,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn actions1(&self) -> usize {
        self.n_i
    }

    pub fn actions2(&self) -> usize {
        self.n_j
    }

    fn cell(&self, l: usize, i: usize, j: usize) -> usize {
        (l * self.n_i + i) * self.n_j + j
    }

    pub fn reward(&self, l: usize, i: usize, j: usize) -> &Rational {
        &self.rewards[self.cell(l, i, j)]
    }

    /// Distribution `q(·|ℓ,i,j)` over next states.
    pub fn transition(&self, l: usize, i: usize, j: usize) -> &[Rational] {
        let c = self.cell(l, i, j) * self.n;
        &self.transitions[c..c + self.n]
    }

    pub fn prob(&self, target: usize, l: usize, i: usize, j: usize) -> &Rational {
        &self.transition(l, i, j)[target]
    }

    pub fn rewards(&self) -> &[Rational] {
        &self.rewards
    }

    /// Reward matrix `G^ℓ`.
    pub fn reward_matrix(&self, l: usize) -> RatMatrix {
        RatMatrix::from_fn(self.n_i, self.n_j, |i, j| self.reward(l, i, j).clone())
    }

    /// Matrix `Q^{ℓ,ℓ'} = (q(ℓ'|ℓ,i,j))_{i,j}`.
    pub fn transition_block(&self, l: usize, target: usize) -> RatMatrix {
        RatMatrix::from_fn(self.n_i, self.n_j, |i, j| self.prob(target, l, i, j).clone())
    }

    pub fn reward_bounds(&self) -> (Rational, Rational) {
        let min = self.rewards.iter().min().unwrap().clone();
        let max = self.rewards.iter().max().unwrap().clone();
        (min, max)
    }

    /// Least common denominator of all rewards and transition probabilities.
    pub fn common_denominator(&self) -> num_bigint::BigInt {
        lcm_denominators(self.rewards.iter().chain(&self.transitions))
    }

    /// Same transitions, rewards mapped through `f`.
    pub fn map_rewards(&self, f: impl Fn(&Rational) -> Rational) -> Game {
        Game {
            rewards: self.rewards.iter().map(f).collect(),
            ..self.clone()
        }
    }

    /// Relabels states: new state `s` is old state `order[s]`.
    pub fn permute_states(&self, order: &[usize]) -> Result<Game> {
        let mut seen = vec![false; self.n];
        if order.len() != self.n
            || order
                .iter()
                .any(|&s| s >= self.n || std::mem::replace(&mut seen[s], true))
        {
            return Err(Error::Invalid(format!("{order:?} is not a permutation of the states")));
        }
        let mut position = vec![0; self.n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        Game::from_fn(
            self.n,
            self.n_i,
            self.n_j,
            |l, i, j| self.reward(order[l], i, j).clone(),
            |l, i, j| {
                let old = self.transition(order[l], i, j);
                let mut row = vec![Rational::zero(); self.n];
                for (t, p) in old.iter().enumerate() {
                    row[position[t]] = p.clone();
                }
                row
            },
        )
    }
}

/// One action per state for each player (`𝐢 ∈ Iⁿ`, `𝐣 ∈ Jⁿ`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PureProfile {
    pub i_vec: Vec<usize>,
    pub j_vec: Vec<usize>,
}

impl PureProfile {
    pub fn new(game: &Game, i_vec: Vec<usize>, j_vec: Vec<usize>) -> Result<Self> {
        check_pure(&i_vec, game.states(), game.actions1())?;
        check_pure(&j_vec, game.states(), game.actions2())?;
        Ok(PureProfile { i_vec, j_vec })
    }
}

fn check_pure(v: &[usize], n: usize, actions: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!(
            "pure strategy with {} entries for {n} states",
            v.len()
        )));
    }
    if let Some(&a) = v.iter().find(|&&a| a >= actions) {
        return Err(Error::IndexOutOfRange {
            index: a,
            size: actions,
        });
    }
    Ok(())
}

/// A mixed action per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationaryStrategy {
    per_state: Vec<Vec<Rational>>,
}

impl StationaryStrategy {
    pub fn new(per_state: Vec<Vec<Rational>>) -> Result<Self> {
        for (l, p) in per_state.iter().enumerate() {
            if p.is_empty() || p.iter().any(Signed::is_negative) || !p.iter().sum::<Rational>().is_one() {
                return Err(Error::Invalid(format!(
                    "strategy at state {} is not a probability vector",
                    l + 1
                )));
            }
        }
        Ok(StationaryStrategy { per_state })
    }

    pub fn pure(actions: &[usize], count: usize) -> Self {
        StationaryStrategy {
            per_state: actions
                .iter()
                .map(|&a| {
                    (0..count)
                        .map(|b| if a == b { Rational::one() } else { Rational::zero() })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn uniform(states: usize, count: usize) -> Self {
        let w = Rational::new(1.into(), (count as i64).into());
        StationaryStrategy {
            per_state: vec![vec![w; count]; states],
        }
    }

    pub fn at(&self, state: usize) -> &[Rational] {
        &self.per_state[state]
    }

    pub fn states(&self) -> usize {
        self.per_state.len()
    }

    /// Product weight `x̂(𝐢) = Π_ℓ x^ℓ(𝐢^ℓ)`.
    pub fn product_weight(&self, profile: &[usize]) -> Rational {
        self.per_state.iter().zip(profile).map(|(p, &a)| p[a].clone()).product()
    }

    fn check(&self, n: usize, actions: usize) -> Result<()> {
        if self.per_state.len() != n || self.per_state.iter().any(|p| p.len() != actions) {
            return Err(Error::Dimension(format!(
                "strategy shape does not match {n} states with {actions} actions"
            )));
        }
        Ok(())
    }
}

/// `0 < λ ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountRate(Rational);

impl DiscountRate {
    pub fn new(lambda: Rational) -> Result<Self> {
        if !lambda.is_positive() || lambda > Rational::one() {
            return Err(Error::Invalid(format!(
                "discount rate must lie in (0, 1], got {lambda}"
            )));
        }
        Ok(DiscountRate(lambda))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }
}

fn per_cell_mix<T>(
    game: &Game,
    x: &StationaryStrategy,
    y: &StationaryStrategy,
    mut f: impl FnMut(usize, usize, usize, &Rational) -> T,
) -> Result<()> {
    x.check(game.states(), game.actions1())?;
    y.check(game.states(), game.actions2())?;
    for l in 0..game.states() {
        for (i, xi) in x.at(l).iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.at(l).iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                f(l, i, j, &(xi * yj));
            }
        }
    }
    Ok(())
}

/// `Q^{ℓ,ℓ'}(x,y) = Σ_{i,j} x^ℓ(i) y^ℓ(j) q(ℓ'|ℓ,i,j)`
pub fn transition_matrix(game: &Game, x: &StationaryStrategy, y: &StationaryStrategy) -> Result<RatMatrix> {
    let n = game.states();
    let mut q = RatMatrix::zeros(n, n);
    per_cell_mix(game, x, y, |l, i, j, w| {
        for (t, p) in game.transition(l, i, j).iter().enumerate() {
            let v = q.get(l, t) + w * p;
            q.set(l, t, v);
        }
    })?;
    Ok(q)
}

/// `g^ℓ(x,y) = Σ_{i,j} x^ℓ(i) y^ℓ(j) g(ℓ,i,j)`
pub fn expected_reward(game: &Game, x: &StationaryStrategy, y: &StationaryStrategy) -> Result<Vec<Rational>> {
    let mut g = vec![Rational::zero(); game.states()];
    per_cell_mix(game, x, y, |l, i, j, w| g[l] += w * game.reward(l, i, j))?;
    Ok(g)
}

/// `Id − (1−λ)Q`
pub fn resolvent_matrix(q: &RatMatrix, lambda: &DiscountRate) -> RatMatrix {
    let keep = Rational::one() - lambda.value();
    RatMatrix::from_fn(q.rows(), q.cols(), |r, c| {
        let id = if r == c { Rational::one() } else { Rational::zero() };
        id - &keep * q.get(r, c)
    })
}

/// Exact `γ_λ(x,y)`, the vector of normalized discounted payoffs per initial state.
pub fn discounted_payoff(
    game: &Game,
    x: &StationaryStrategy,
    y: &StationaryStrategy,
    lambda: &DiscountRate,
) -> Result<Vec<Rational>> {
    let q = transition_matrix(game, x, y)?;
    let g = expected_reward(game, x, y)?;
    let rhs: Vec<Rational> = g.iter().map(|v| lambda.value() * v).collect();
    // invertible for λ > 0 (diagonally dominant)
    resolvent_matrix(&q, lambda).solve_linear(&rhs)
}

/// Rewards mapped into `[0,1]`, with `original = scale·normalized + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub game: Game,
    pub scale: Rational,
    pub offset: Rational,
}

impl Normalized {
    pub fn to_original(&self, v: &Rational) -> Rational {
        &self.scale * v + &self.offset
    }

    pub fn to_normalized(&self, v: &Rational) -> Rational {
        (v - &self.offset) / &self.scale
    }
}

/// Maps rewards by `r ↦ (r − min)/(max − min)`. A constant game maps to all
/// zeros with `scale = 1`, `offset = min`.
pub fn affine_normalize(game: &Game) -> Normalized {
    let (lo, hi) = game.reward_bounds();
    if lo == hi {
        return Normalized {
            game: game.map_rewards(|_| Rational::zero()),
            scale: Rational::one(),
            offset: lo,
        };
    }
    let span = &hi - &lo;
    Normalized {
        game: game.map_rewards(|r| (r - &lo) / &span),
        scale: span,
        offset: lo,
    }
}
