//! Shapley operator iterated to a certified tolerance, and the exact
//! one-player brute force.
//!
//! cargo run --example value_iteration

use stochgame::gamecore::{DiscountRate, Game};
use stochgame::oracle::{mdp_brute_force, value_iteration};
use stochgame::ratlinalg::{int, pow2_neg, rat, to_decimal};

fn main() {
    // two states; in each, stay (pay 1 or 1/2) or switch (pay 0)
    let mdp = Game::from_fn(
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
    for (p, q) in [(1, 2), (1, 3), (1, 10)] {
        let lambda = DiscountRate::new(rat(p, q)).unwrap();
        let vi = value_iteration(&mdp, &lambda, &pow2_neg(20)).unwrap();
        let exact: Vec<String> = (0..2)
            .map(|k| mdp_brute_force(&mdp, k, &lambda).unwrap().to_string())
            .collect();
        println!(
            "lambda {p}/{q}: iteration ({}, {}) after {} steps, exact ({})",
            to_decimal(&vi.values[0], 6),
            to_decimal(&vi.values[1], 6),
            vi.iterations,
            exact.join(", ")
        );
    }
}
