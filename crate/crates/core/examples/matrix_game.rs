//! Exact value and optimal strategies of a matrix game, cross-checked by the
//! determinant formula over square kernels.
//!
//! cargo run --example matrix_game

use stochgame::matrixgame::{shapley_snow, solve, MatrixGame};
use stochgame::ratlinalg::RatMatrix;

fn main() {
    let games = [
        ("2x2 with a mixed optimum", RatMatrix::from_i64(&[&[3, 1], &[0, 2]])),
        (
            "rock-paper-scissors, uneven stakes",
            RatMatrix::from_i64(&[&[0, -1, 2], &[1, 0, -1], &[-1, 1, 0]]),
        ),
        ("saddle point", RatMatrix::from_i64(&[&[4, 2, 5], &[1, 0, 3]])),
    ];
    for (name, m) in games {
        let game = MatrixGame::new(m).unwrap();
        let sol = solve(&game);
        let kernel = shapley_snow(&game).unwrap();
        let fmt = |v: &[stochgame::Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        println!("{name}");
        println!("  value        {}", sol.value);
        println!("  row player   ({})", fmt(&sol.x_opt));
        println!("  col player   ({})", fmt(&sol.y_opt));
        println!(
            "  kernel rows {:?} cols {:?}: det {} / cofactor sum {} = {}",
            kernel.rows, kernel.cols, kernel.det, kernel.cofactor_sum, kernel.solution.value
        );
        assert!(sol.certifies(&game));
    }
}
