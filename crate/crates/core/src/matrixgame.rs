//! Zero-sum matrix games over exact rationals.
//!
//! Rows belong to the maximizer (Player 1), columns to the minimizer
//! (Player 2). [`solve`] runs a Bland's-rule simplex on the usual LP of the
//! game after shifting payoffs to be at least one; [`shapley_snow`] is an
//! independent route that enumerates square kernels and is used as an oracle.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratlinalg::{RatMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGame {
    payoff: RatMatrix,
}

impl MatrixGame {
    pub fn new(payoff: RatMatrix) -> Result<Self> {
        if payoff.rows() == 0 || payoff.cols() == 0 {
            return Err(Error::Dimension(
                "a matrix game needs at least one row and one column".into(),
            ));
        }
        Ok(MatrixGame { payoff })
    }

    pub fn payoff(&self) -> &RatMatrix {
        &self.payoff
    }

    pub fn rows(&self) -> usize {
        self.payoff.rows()
    }

    pub fn cols(&self) -> usize {
        self.payoff.cols()
    }

    /// `max_a min_b M[a,b]`
    pub fn lower_pure_value(&self) -> Rational {
        (0..self.rows())
            .map(|a| self.payoff.row(a).iter().min().unwrap().clone())
            .max()
            .unwrap()
    }

    /// `min_b max_a M[a,b]`
    pub fn upper_pure_value(&self) -> Rational {
        (0..self.cols())
            .map(|b| (0..self.rows()).map(|a| self.payoff.get(a, b)).max().unwrap().clone())
            .min()
            .unwrap()
    }

    /// The game `−Mᵀ`, i.e. the same game with the roles swapped.
    pub fn negated_transpose(&self) -> MatrixGame {
        MatrixGame {
            payoff: self.payoff.transpose().map(|x| -x),
        }
    }
}

impl From<RatMatrix> for MatrixGame {
    /// Panics on an empty matrix; use [`MatrixGame::new`] for checked construction.
    fn from(m: RatMatrix) -> Self {
        MatrixGame::new(m).expect("non-empty payoff matrix")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSolution {
    pub value: Rational,
    pub x_opt: Vec<Rational>,
    pub y_opt: Vec<Rational>,
}

impl GameSolution {
    /// Checks that both strategies are distributions and that they guarantee
    /// `value` against every pure reply, exactly.
    pub fn certifies(&self, game: &MatrixGame) -> bool {
        is_distribution(&self.x_opt, game.rows())
            && is_distribution(&self.y_opt, game.cols())
            && guarantees(game, &self.x_opt, &self.y_opt, &self.value)
    }
}

fn is_distribution(p: &[Rational], len: usize) -> bool {
    p.len() == len && p.iter().all(|w| !w.is_negative()) && p.iter().sum::<Rational>().is_one()
}

fn guarantees(game: &MatrixGame, x: &[Rational], y: &[Rational], value: &Rational) -> bool {
    let m = game.payoff();
    let cols_ok = (0..m.cols()).all(|b| {
        let s: Rational = (0..m.rows()).map(|a| &x[a] * m.get(a, b)).sum();
        &s >= value
    });
    let rows_ok = (0..m.rows()).all(|a| {
        let s: Rational = m.row(a).iter().zip(y).map(|(p, w)| p * w).sum();
        &s <= value
    });
    cols_ok && rows_ok
}

/// Exact value and a pair of optimal mixed strategies.
///
/// With `B = M + s ≥ 1`, the minimizer's program `max Σt s.t. B t ≤ 1, t ≥ 0`
/// has optimum `1/val B`; its dual gives the maximizer's strategy through the
/// reduced costs of the slack columns.
pub fn solve(game: &MatrixGame) -> GameSolution {
    let m = game.payoff();
    let (rows, cols) = (m.rows(), m.cols());
    let min = m.entries().iter().min().unwrap();
    let shift = if *min < Rational::one() {
        Rational::one() - min
    } else {
        Rational::zero()
    };

    // columns 0..cols are t, cols..cols+rows are slacks
    let width = cols + rows;
    let mut tab: Vec<Vec<Rational>> = (0..rows)
        .map(|a| {
            let mut row: Vec<Rational> = m.row(a).iter().map(|x| x + &shift).collect();
            row.extend((0..rows).map(|s| if s == a { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let mut rhs = vec![Rational::one(); rows];
    let mut basis: Vec<usize> = (cols..width).collect();
    let mut reduced: Vec<Rational> = (0..width)
        .map(|j| if j < cols { Rational::one() } else { Rational::zero() })
        .collect();
    let mut objective = Rational::zero();

    // Bland: lowest-index improving column, ties in the ratio test broken by
    // lowest basic variable index.
    while let Some(enter) = (0..width).find(|&j| reduced[j].is_positive()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if !tab[r][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[r] / &tab[r][enter];
            leave = match leave {
                None => Some((r, ratio)),
                Some((best, best_ratio)) => {
                    if ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[best]) {
                        Some((r, ratio))
                    } else {
                        Some((best, best_ratio))
                    }
                }
            };
        }
        // every column of B is positive, so the program is bounded
        let (pr, _) = leave.expect("bounded matrix-game program");
        let pivot = tab[pr][enter].clone();
        for x in tab[pr].iter_mut() {
            *x /= &pivot;
        }
        rhs[pr] /= &pivot;
        let prow = tab[pr].clone();
        let prhs = rhs[pr].clone();
        for r in 0..rows {
            if r == pr || tab[r][enter].is_zero() {
                continue;
            }
            let f = tab[r][enter].clone();
            for (x, p) in tab[r].iter_mut().zip(&prow) {
                *x -= &f * p;
            }
            rhs[r] -= &f * &prhs;
        }
        let f = reduced[enter].clone();
        for (x, p) in reduced.iter_mut().zip(&prow) {
            *x -= &f * p;
        }
        objective += &f * &prhs;
        basis[pr] = enter;
    }

    let mut t = vec![Rational::zero(); cols];
    for (r, &b) in basis.iter().enumerate() {
        if b < cols {
            t[b] = rhs[r].clone();
        }
    }
    let u: Vec<Rational> = (0..rows).map(|a| -&reduced[cols + a]).collect();
    let inv = Rational::one() / &objective;
    let sol = GameSolution {
        value: &inv - &shift,
        x_opt: u.iter().map(|w| w * &inv).collect(),
        y_opt: t.iter().map(|w| w * &inv).collect(),
    };
    debug_assert!(sol.certifies(game));
    sol
}

pub fn value(game: &MatrixGame) -> Rational {
    solve(game).value
}

/// Entrywise `c·M + d`; `c` must be positive.
pub fn affine_transform(game: &MatrixGame, c: &Rational, d: &Rational) -> Result<MatrixGame> {
    if !c.is_positive() {
        return Err(Error::Invalid(format!("affine scale must be positive, got {c}")));
    }
    Ok(MatrixGame {
        payoff: game.payoff().map(|x| c * x + d),
    })
}

/// A certified Shapley–Snow kernel: square submatrix `M̂` with `φ(M̂) ≠ 0`
/// whose cofactor-derived strategies are optimal in the full game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnowKernel {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: Rational,
    pub cofactor_sum: Rational,
    pub solution: GameSolution,
}

/// Enumerates square submatrices by size, then lexicographically by row set
/// and column set, and returns the first one whose value `det/φ` is certified
/// by its induced strategies.
pub fn shapley_snow(game: &MatrixGame) -> Result<SnowKernel> {
    let m = game.payoff();
    let lo = game.lower_pure_value();
    let hi = game.upper_pure_value();
    let ones = |len: usize| vec![Rational::one(); len];
    for size in 1..=m.rows().min(m.cols()) {
        for rows in combinations(m.rows(), size) {
            for cols in combinations(m.cols(), size) {
                let sub = m.select(&rows, &cols);
                let phi = sub.cofactor_sum()?;
                if phi.is_zero() {
                    continue;
                }
                let det = sub.det()?;
                let v = &det / &phi;
                if v < lo || v > hi {
                    continue;
                }
                // row a of the cofactor matrix sums to det(M̂ with row a := 1)
                let mut x = vec![Rational::zero(); m.rows()];
                let mut y = vec![Rational::zero(); m.cols()];
                let mut ok = true;
                for (p, &a) in rows.iter().enumerate() {
                    let w = sub.replace_row(p, &ones(size))?.det()? / &phi;
                    ok &= !w.is_negative();
                    x[a] = w;
                }
                for (p, &b) in cols.iter().enumerate() {
                    let w = sub.replace_column(p, &ones(size))?.det()? / &phi;
                    ok &= !w.is_negative();
                    y[b] = w;
                }
                if ok && guarantees(game, &x, &y, &v) {
                    return Ok(SnowKernel {
                        rows,
                        cols,
                        det,
                        cofactor_sum: phi,
                        solution: GameSolution {
                            value: v,
                            x_opt: x,
                            y_opt: y,
                        },
                    });
                }
            }
        }
    }
    Err(Error::Internal("no square submatrix certifies the value".into()))
}

pub fn shapley_snow_value(game: &MatrixGame) -> Result<Rational> {
    Ok(shapley_snow(game)?.solution.value)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for t in i + 1..k {
                    next[t] = next[t - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlinalg::{int, rat};
    use proptest::prelude::*;

    fn game(rows: &[&[i64]]) -> MatrixGame {
        MatrixGame::new(RatMatrix::from_i64(rows)).unwrap()
    }

    /// Brute-force oracle for 2×n games: the value is the max over x ∈ [0,1]
    /// of the lower envelope, attained at 0, 1 or a pairwise crossing point.
    fn two_row_value(g: &MatrixGame) -> Rational {
        let m = g.payoff();
        assert_eq!(m.rows(), 2);
        let mut candidates = vec![Rational::zero(), Rational::one()];
        for b in 0..m.cols() {
            for c in 0..m.cols() {
                // p·m0b + (1−p)·m1b = p·m0c + (1−p)·m1c
                let den = (m.get(0, b) - m.get(1, b)) - (m.get(0, c) - m.get(1, c));
                if !den.is_zero() {
                    let p = (m.get(1, c) - m.get(1, b)) / den;
                    if !p.is_negative() && p <= Rational::one() {
                        candidates.push(p);
                    }
                }
            }
        }
        candidates
            .into_iter()
            .map(|p| {
                (0..m.cols())
                    .map(|b| &p * m.get(0, b) + (Rational::one() - &p) * m.get(1, b))
                    .min()
                    .unwrap()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn solve_examples() {
        let s = solve(&game(&[&[7]]));
        assert_eq!((s.value, s.x_opt, s.y_opt), (int(7), vec![int(1)], vec![int(1)]));

        let s = solve(&game(&[&[1, -1], &[-1, 1]]));
        assert_eq!(s.value, int(0));
        assert_eq!(s.x_opt, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(s.y_opt, vec![rat(1, 2), rat(1, 2)]);

        let g = game(&[&[3, 1], &[0, 2]]);
        assert_eq!(two_row_value(&g), rat(3, 2));
        let s = solve(&g);
        assert_eq!(s.value, rat(3, 2));
        assert_eq!(s.x_opt, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(s.y_opt, vec![rat(1, 4), rat(3, 4)]);
    }

    #[test]
    fn rock_paper_scissors_variant() {
        let g = game(&[&[0, 2, -1], &[-1, 0, 1], &[1, -1, 0]]);
        let s = solve(&g);
        assert_eq!(s.value, rat(1, 12));
        assert!(s.certifies(&g));
    }

    #[test]
    fn shapley_snow_examples() {
        let k = shapley_snow(&game(&[&[-4]])).unwrap();
        assert_eq!((k.solution.value, k.cofactor_sum), (int(-4), int(1)));

        let k = shapley_snow(&game(&[&[3, 1], &[0, 2]])).unwrap();
        assert_eq!((k.det, k.cofactor_sum, k.solution.value), (int(6), int(4), rat(3, 2)));

        let k = shapley_snow(&game(&[&[2, 2], &[2, 2]])).unwrap();
        assert_eq!((k.rows.len(), k.solution.value), (1, int(2)));
    }

    #[test]
    fn affine_examples() {
        let g = game(&[&[1, -1], &[-1, 1]]);
        assert_eq!(affine_transform(&g, &int(1), &int(0)).unwrap(), g);
        assert_eq!(
            affine_transform(&game(&[&[0]]), &int(2), &int(3)).unwrap(),
            game(&[&[3]])
        );
        let t = affine_transform(&g, &rat(1, 2), &int(5)).unwrap();
        assert_eq!(value(&t), int(5));
        assert!(affine_transform(&g, &int(0), &int(1)).is_err());
        assert!(affine_transform(&g, &int(-1), &int(1)).is_err());
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 3).count(), 1);
        assert_eq!(combinations(2, 3).count(), 0);
    }

    #[test]
    fn degenerate_games_still_certify() {
        // duplicated rows/cols and a dominated row
        let g = game(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 0], &[0, 0, 1]]);
        let s = solve(&g);
        assert!(s.certifies(&g));
        assert_eq!(shapley_snow_value(&g).unwrap(), s.value);
    }

    fn arb_game() -> impl Strategy<Value = MatrixGame> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
            proptest::collection::vec((-6i64..=6, 1i64..=3), r * c).prop_map(move |v| {
                let data = v.into_iter().map(|(p, q)| rat(p, q)).collect();
                MatrixGame::new(RatMatrix::new(r, c, data).unwrap()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn solution_is_certified_and_sandwiched(g in arb_game()) {
            let s = solve(&g);
            prop_assert!(s.certifies(&g));
            prop_assert!(g.lower_pure_value() <= s.value && s.value <= g.upper_pure_value());
        }

        #[test]
        fn shapley_snow_agrees(g in arb_game()) {
            prop_assert_eq!(shapley_snow_value(&g).unwrap(), value(&g));
        }

        #[test]
        fn two_row_oracle_agrees(c in 1usize..=4, v in proptest::collection::vec(-9i64..=9, 8)) {
            let data = v[..2 * c].iter().map(|&x| int(x)).collect();
            let g = MatrixGame::new(RatMatrix::new(2, c, data).unwrap()).unwrap();
            prop_assert_eq!(value(&g), two_row_value(&g));
        }

        #[test]
        fn monotone_in_entries(g in arb_game(), bumps in proptest::collection::vec(0i64..=3, 16)) {
            let mut i = 0;
            let h = MatrixGame::new(g.payoff().map(|x| { i += 1; x + int(bumps[(i - 1) % 16]) })).unwrap();
            prop_assert!(value(&g) <= value(&h));
        }

        #[test]
        fn affine_invariance(g in arb_game(), c in 1i64..=5, cd in 1i64..=3, d in -5i64..=5) {
            let c = rat(c, cd);
            let t = affine_transform(&g, &c, &int(d)).unwrap();
            prop_assert_eq!(value(&t), &c * value(&g) + int(d));
        }

        #[test]
        fn transpose_antisymmetry(g in arb_game()) {
            prop_assert_eq!(value(&g.negated_transpose()), -value(&g));
        }
    }
}
