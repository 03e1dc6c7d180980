//! Discounted value by bisection on z ↦ val W_λ^k(z), compared with value
//! iteration.
//!
//! cargo run --example discounted_value [lambda] [precision]

use stochgame::gamecore::DiscountRate;
use stochgame::generate::random_game;
use stochgame::oracle::value_iteration;
use stochgame::ratlinalg::{parse_rational, pow2_neg, to_decimal};
use stochgame::solver::discounted_value;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let lambda = DiscountRate::new(parse_rational(&args.next().unwrap_or("1/3".into())).unwrap()).unwrap();
    let r: u32 = args.next().map(|s| s.parse().unwrap()).unwrap_or(16);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let game = random_game(&mut rng, 2, 2, 2, 6);
    let oracle = value_iteration(&game, &lambda, &pow2_neg(r + 4)).unwrap();

    for k in 0..game.states() {
        let res = discounted_value(&game, k, &lambda, r).unwrap();
        println!(
            "state {}: v in [{}, {}]  ~ {}   value iteration {}   ({} bisection steps)",
            k + 1,
            res.lower,
            res.upper,
            to_decimal(&res.value_estimate, 8),
            to_decimal(&oracle.values[k], 8),
            res.iterations
        );
    }
}
