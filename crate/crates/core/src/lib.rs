//! Exact solver for finite two-player zero-sum stochastic games.
//!
//! The discounted value `v_λ^k` is found as the root of `z ↦ val W_λ^k(z)`,
//! where `W_λ^k(z)` is a matrix game indexed by pairs of pure stationary
//! strategies whose entries are `d^k_λ − z·d⁰_λ` (two determinants per entry).
//! The undiscounted value `v^k` is located by the sign change of
//! `F^k(z) = lim_{λ→0} val W_λ^k(z)/λⁿ`. Both are computed by bisection over
//! exact rationals; no floating point is involved anywhere in a decision.
//!
//! Module map:
//!
//! * [`ratlinalg`]: rationals, matrices, fraction-free determinants.
//! * [`matrixgame`]: exact matrix-game values (simplex) and the Shapley–Snow check.
//! * [`gamecore`]: the stochastic game model and stationary-strategy payoffs.
//! * [`wgame`]: the parameterized matrices `W_λ^k(z)`, direct and Kronecker routes.
//! * [`solver`]: the two bisection algorithms and the sign of `F^k`.
//! * [`oracle`]: Shapley operator, value iteration, one-player brute force.
//! * [`absorbing`]: absorbing games and Kohlberg's quotient.
//! * [`cli`]: game file format and the command reports used by the binary.
//!
//! ```
//! use num_traits::Signed;
//! use stochgame::gamecore::{DiscountRate, Game};
//! use stochgame::ratlinalg::rat;
//! use stochgame::solver::discounted_value;
//!
//! // one state, matching pennies shifted into [0, 1]
//! let game = Game::single_state(&[vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]).unwrap();
//! let lambda = DiscountRate::new(rat(1, 2)).unwrap();
//! let res = discounted_value(&game, 0, &lambda, 8).unwrap();
//! assert!((res.value_estimate - rat(1, 2)).abs() <= res.radius);
//! ```

pub mod absorbing;
pub mod cli;
pub mod error;
pub mod gamecore;
pub mod generate;
pub mod matrixgame;
pub mod oracle;
pub mod ratlinalg;
pub mod solver;
pub mod wgame;

pub use error::{Error, Result};
pub use ratlinalg::{RatMatrix, Rational, Sign};
