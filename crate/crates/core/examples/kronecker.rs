//! The two routes to W_λ^k(z): per-entry determinants and the block array
//! expanded with Kronecker products.
//!
//! cargo run --example kronecker

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochgame::gamecore::DiscountRate;
use stochgame::generate::random_game;
use stochgame::ratlinalg::rat;
use stochgame::wgame::{build_w, build_w_kronecker};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let game = random_game(&mut rng, 2, 2, 2, 4);
    let lambda = DiscountRate::new(rat(1, 3)).unwrap();
    let z = rat(1, 2);
    for k in 0..2 {
        let direct = build_w(&game, k, &lambda, &z).unwrap();
        let kron = build_w_kronecker(&game, k, &lambda, &z).unwrap();
        println!(
            "W for initial state {} (rows: player 1 profiles, columns: player 2 profiles)",
            k + 1
        );
        print!("{}", direct.payoff);
        println!("Kronecker route agrees: {}\n", direct == kron);
    }
}
