//! Absorbing games: val W/λⁿ against Kohlberg's quotient (Φ(λ,u(z)) − z)/λ,
//! and the limit sign read on the λ ladder.
//!
//! cargo run --example absorbing_kohlberg

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochgame::absorbing::{check_f_equals_t, kohlberg_sign, AbsorbingGame};
use stochgame::gamecore::DiscountRate;
use stochgame::generate::random_absorbing_game;
use stochgame::ratlinalg::rat;
use stochgame::solver::{sign_of_f, LadderConfig};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let game = random_absorbing_game(&mut rng, 3, 2, 2, 4);
    let ag = AbsorbingGame::new(&game, 0).unwrap();
    for (p, q) in [(1, 2), (1, 5), (1, 40)] {
        let lambda = DiscountRate::new(rat(p, q)).unwrap();
        let rep = check_f_equals_t(&ag, &lambda, &rat(1, 2)).unwrap();
        println!(
            "lambda {p}/{q}: val W/lambda^n = {}  quotient = {}  equal: {}",
            rep.w_side,
            rep.quotient,
            rep.value_identity_holds()
        );
    }
    let ladder = LadderConfig::default();
    for n in 0..=8 {
        let z = rat(n, 8);
        let (t, _) = kohlberg_sign(&ag, &z, &ladder).unwrap();
        let f = sign_of_f(ag.game(), 0, &z, 4).unwrap().sign;
        println!("z = {:>4}: sign T {:>2}  sign F {:>2}", z.to_string(), t.to_string(), f.to_string());
    }
}
