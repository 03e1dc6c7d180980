//! The Big Match: discounted values are 1/2 for every λ and the limit value,
//! found from the sign of F, is 1/2 as well.
//!
//! cargo run --example limit_value_big_match

use stochgame::gamecore::{DiscountRate, Game};
use stochgame::ratlinalg::{int, pow2_neg};
use stochgame::solver::{discounted_value, limit_value};

fn big_match() -> Game {
    Game::from_fn(
        3,
        2,
        2,
        |l, i, j| match l {
            0 => int((i == j) as i64),
            1 => int(1),
            _ => int(0),
        },
        |l, i, j| match (l, i, j) {
            (0, 0, 0) => vec![int(0), int(1), int(0)],
            (0, 0, 1) => vec![int(0), int(0), int(1)],
            (0, 1, _) => vec![int(1), int(0), int(0)],
            (1, _, _) => vec![int(0), int(1), int(0)],
            _ => vec![int(0), int(0), int(1)],
        },
    )
    .unwrap()
}

fn main() {
    let game = big_match();
    for t in [2, 4, 8] {
        let res = discounted_value(&game, 0, &DiscountRate::new(pow2_neg(t)).unwrap(), 10).unwrap();
        println!("lambda = 2^-{t}: v in [{}, {}]", res.lower, res.upper);
    }
    let res = limit_value(&game, 0, 10).unwrap();
    println!("limit value in [{}, {}]", res.lower, res.upper);
    for e in &res.evidence {
        let rungs: Vec<String> = e.rungs.iter().map(|(t, s)| format!("2^-{t}:{s}")).collect();
        println!(
            "  z = {:>8}  sign {:>8}  rungs {}  lambda_r 2^-{} -> {:?}",
            e.z.to_string(),
            e.sign.to_string(),
            rungs.join(" "),
            e.lambda_r_exponent,
            e.lambda_r_sign
        );
    }
}
