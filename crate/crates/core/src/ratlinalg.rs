//! Exact rational scalars and dense matrices.
//!
//! Everything here is exact: zero tests compare numerators against zero and
//! there is no tolerance anywhere. Determinants use fraction-free (Bareiss)
//! elimination on integers after clearing row denominators.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Shorthand for `p/q` with small integer parts. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// `2^{-e}` as an exact rational.
pub fn pow2_neg(e: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

pub fn pow(x: &Rational, e: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Parses `"p/q"` or `"p"` with an optional leading sign. The denominator
/// must be a positive integer; the result is canonical, so `"2/4"` and
/// `"1/2"` give identical values.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = |why: &str| Error::Invalid(format!("malformed rational {s:?}: {why}"));
    if t.is_empty() {
        return Err(bad("empty"));
    }
    let (num_str, den_str) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (t, None),
    };
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
    let unsigned = num_str.strip_prefix(['+', '-']).unwrap_or(num_str);
    if !digits(unsigned) {
        return Err(bad("numerator is not an integer"));
    }
    let num = BigInt::from_str(num_str).map_err(|_| bad("numerator is not an integer"))?;
    let den = match den_str {
        None => BigInt::one(),
        Some(d) => {
            if !digits(d) {
                return Err(bad("denominator must be a positive integer"));
            }
            let d = BigInt::from_str(d).map_err(|_| bad("denominator"))?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            d
        }
    };
    Ok(Rational::new(num, den))
}

/// Decimal rendering rounded to `digits` places after the point, ties away
/// from zero.
pub fn to_decimal(x: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = x.abs() * Rational::from_integer(scale.clone());
    let mut n = scaled.trunc().to_integer();
    if scaled.fract() * int(2) >= Rational::one() {
        n += 1;
    }
    let neg = x.is_negative() && !n.is_zero();
    let (whole, frac) = n.div_rem(&scale);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        out.push('.');
        let f = frac.to_string();
        out.push_str(&"0".repeat(digits - f.len()));
        out.push_str(&f);
    }
    out
}

/// Approximate conversion for display and timing heuristics only.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators of `xs` (1 when empty).
pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: &Rational) -> Sign {
        if x.is_zero() {
            Sign::Zero
        } else if x.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        })
    }
}

/// Dense row-major matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: Rational) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RatMatrix { rows, cols, data }
    }

    /// Builds from nested rows; all rows must have the same nonzero length.
    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(RatMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    /// Convenience for tests and examples: integer entries.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Self::from_rows(&v).expect("rectangular integer rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn map(&self, f: impl FnMut(&Rational) -> Rational) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn add(&self, other: &RatMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix sum of different shapes".into()));
        }
        Ok(RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).fold(Rational::zero(), |acc, t| acc + self.get(r, t) * other.get(t, c))
        }))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Kronecker product: entry `[(a·p + b), (c·q + d)] = self[a,c]·other[b,d]`
    /// where `other` is `p×q`.
    pub fn kron(&self, other: &RatMatrix) -> Self {
        let (p, q) = (other.rows, other.cols);
        Self::from_fn(self.rows * p, self.cols * q, |r, c| {
            self.get(r / p, c / q) * other.get(r % p, c % q)
        })
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }

    fn require_square(&self) -> Result<usize> {
        if !self.is_square() || self.rows == 0 {
            return Err(Error::Dimension(format!(
                "square matrix of size >= 1 required, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    /// Exact determinant by Bareiss elimination.
    pub fn det(&self) -> Result<Rational> {
        let n = self.require_square()?;
        let mut scale = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|r| {
                let l = lcm_denominators(self.row(r));
                scale *= &l;
                let lr = Rational::from_integer(l);
                self.row(r).iter().map(|x| (x * &lr).to_integer()).collect()
            })
            .collect();
        let mut negate = false;
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&p| !a[p][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        negate = !negate;
                    }
                    None => return Ok(Rational::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    // exact by Sylvester's identity
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        let d = Rational::new(a[n - 1][n - 1].clone(), scale);
        Ok(if negate { -d } else { d })
    }

    /// Copy with column `k` (0-based) replaced by `v`.
    pub fn replace_column(&self, k: usize, v: &[Rational]) -> Result<Self> {
        let n = self.require_square()?;
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, size: n });
        }
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "replacement column of length {} for size {n}",
                v.len()
            )));
        }
        let mut out = self.clone();
        for (r, x) in v.iter().enumerate() {
            out.set(r, k, x.clone());
        }
        Ok(out)
    }

    /// Copy with row `k` (0-based) replaced by `v`.
    pub fn replace_row(&self, k: usize, v: &[Rational]) -> Result<Self> {
        let n = self.require_square()?;
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, size: n });
        }
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "replacement row of length {} for size {n}",
                v.len()
            )));
        }
        let mut out = self.clone();
        out.data[k * n..(k + 1) * n].clone_from_slice(v);
        Ok(out)
    }

    /// Sum of all cofactors, `φ(M)`; equals 1 for a 1×1 matrix.
    ///
    /// Uses `det(M + U) = det(M) + 1ᵀ adj(M) 1` for the all-ones matrix `U`.
    pub fn cofactor_sum(&self) -> Result<Rational> {
        self.require_square()?;
        let shifted = self.map(|x| x + Rational::one());
        Ok(shifted.det()? - self.det()?)
    }

    /// Exact solution of `self · x = b`.
    pub fn solve_linear(&self, b: &[Rational]) -> Result<Vec<Rational>> {
        let n = self.require_square()?;
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for size {n}",
                b.len()
            )));
        }
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.push(b[r].clone());
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&p| !a[p][k].is_zero()).ok_or(Error::Singular)?;
            a.swap(k, p);
            let pivot = a[k][k].clone();
            for j in k..=n {
                a[k][j] = &a[k][j] / &pivot;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in k..=n {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        Ok(a.into_iter().map(|mut row| row.pop().unwrap()).collect())
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|x| x.to_string()).collect();
        let w = cells.iter().map(String::len).max().unwrap_or(1);
        for r in 0..self.rows {
            let line: Vec<String> = (0..self.cols)
                .map(|c| format!("{:>w$}", cells[r * self.cols + c]))
                .collect();
            writeln!(f, "[{}]", line.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Cofactor expansion along the first row; test oracle only.
    fn det_by_expansion(m: &RatMatrix) -> Rational {
        let n = m.rows();
        if n == 1 {
            return m.get(0, 0).clone();
        }
        let mut acc = Rational::zero();
        for c in 0..n {
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&x| x != c).collect();
            let minor = det_by_expansion(&m.select(&rows, &cols));
            let term = m.get(0, c) * minor;
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn cofactor_sum_by_minors(m: &RatMatrix) -> Rational {
        let n = m.rows();
        if n == 1 {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for r in 0..n {
            for c in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&x| x != r).collect();
                let cols: Vec<usize> = (0..n).filter(|&x| x != c).collect();
                let minor = det_by_expansion(&m.select(&rows, &cols));
                if (r + c) % 2 == 0 {
                    acc += minor;
                } else {
                    acc -= minor;
                }
            }
        }
        acc
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-12i64..=12, 1i64..=6).prop_map(|(p, q)| rat(p, q))
    }

    fn arb_square(n: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec(arb_rational(), n * n).prop_map(move |v| RatMatrix::new(n, n, v).unwrap())
    }

    #[test]
    fn det_examples() {
        assert_eq!(RatMatrix::identity(3).det().unwrap(), int(1));
        assert_eq!(
            RatMatrix::from_rows(&[vec![rat(-7, 3)]]).unwrap().det().unwrap(),
            rat(-7, 3)
        );
        assert_eq!(RatMatrix::from_i64(&[&[1, 2], &[3, 4]]).det().unwrap(), int(-2));
        // needs a row swap
        assert_eq!(RatMatrix::from_i64(&[&[0, 1], &[1, 0]]).det().unwrap(), int(-1));
        assert_eq!(RatMatrix::from_i64(&[&[1, 2], &[2, 4]]).det().unwrap(), int(0));
    }

    #[test]
    fn det_rejects_non_square() {
        let m = RatMatrix::zeros(2, 3);
        assert!(matches!(m.det(), Err(Error::Dimension(_))));
        assert!(matches!(m.cofactor_sum(), Err(Error::Dimension(_))));
    }

    #[test]
    fn replace_column_examples() {
        let id = RatMatrix::identity(2);
        let r = id.replace_column(0, &[int(5), int(7)]).unwrap();
        assert_eq!(r, RatMatrix::from_i64(&[&[5, 0], &[7, 1]]));
        assert_eq!(id, RatMatrix::identity(2));
        let m = RatMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        assert_eq!(m.replace_column(1, &m.column(1)).unwrap(), m);
        assert_eq!(id.replace_column(1, &[int(0), int(0)]).unwrap().det().unwrap(), int(0));
        assert!(matches!(
            id.replace_column(2, &[int(0), int(0)]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(id.replace_column(0, &[int(0)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn cofactor_sum_examples() {
        assert_eq!(RatMatrix::from_i64(&[&[9]]).cofactor_sum().unwrap(), int(1));
        assert_eq!(RatMatrix::from_i64(&[&[3, 1], &[0, 2]]).cofactor_sum().unwrap(), int(4));
        assert_eq!(RatMatrix::identity(2).cofactor_sum().unwrap(), int(2));
    }

    #[test]
    fn solve_examples() {
        let b = vec![rat(1, 3), int(-2)];
        assert_eq!(RatMatrix::identity(2).solve_linear(&b).unwrap(), b);
        let d = RatMatrix::from_i64(&[&[2, 0], &[0, 4]]);
        assert_eq!(d.solve_linear(&[int(1), int(1)]).unwrap(), vec![rat(1, 2), rat(1, 4)]);
        let s = RatMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(matches!(s.solve_linear(&[int(1), int(1)]), Err(Error::Singular)));
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(parse_rational("2/4").unwrap(), parse_rational("1/2").unwrap());
        assert_eq!(parse_rational(" -3 ").unwrap(), int(-3));
        assert_eq!(parse_rational("+6/8").unwrap(), rat(3, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(to_decimal(&rat(2, 3), 4), "0.6667");
        assert_eq!(to_decimal(&rat(-1, 8), 2), "-0.13");
        assert_eq!(to_decimal(&rat(-1, 1000), 2), "0.00");
        assert_eq!(to_decimal(&int(5), 0), "5");
        assert_eq!(to_decimal(&rat(1, 20), 3), "0.050");
    }

    proptest! {
        #[test]
        fn det_matches_expansion(m in (1usize..=4).prop_flat_map(arb_square)) {
            prop_assert_eq!(m.det().unwrap(), det_by_expansion(&m));
            prop_assert_eq!(m.cofactor_sum().unwrap(), cofactor_sum_by_minors(&m));
        }

        #[test]
        fn det_is_multiplicative(a in arb_square(3), b in arb_square(3)) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(ab.det().unwrap(), a.det().unwrap() * b.det().unwrap());
        }

        #[test]
        fn det_linear_in_replaced_column(
            m in arb_square(3),
            k in 0usize..3,
            u in proptest::collection::vec(arb_rational(), 3),
            w in proptest::collection::vec(arb_rational(), 3),
            alpha in arb_rational(),
            beta in arb_rational(),
        ) {
            let mix: Vec<Rational> = u.iter().zip(&w).map(|(a, b)| &alpha * a + &beta * b).collect();
            let lhs = m.replace_column(k, &mix).unwrap().det().unwrap();
            let rhs = &alpha * m.replace_column(k, &u).unwrap().det().unwrap()
                + &beta * m.replace_column(k, &w).unwrap().det().unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cramer_consistency(m in arb_square(3), b in proptest::collection::vec(arb_rational(), 3)) {
            let d = m.det().unwrap();
            prop_assume!(!d.is_zero());
            let x = m.solve_linear(&b).unwrap();
            prop_assert_eq!(m.mul_vec(&x).unwrap(), b.clone());
            for k in 0..3 {
                prop_assert_eq!(&x[k] * &d, m.replace_column(k, &b).unwrap().det().unwrap());
            }
        }

        #[test]
        fn parse_is_canonical(p in -1000i64..1000, q in 1i64..1000, f in 1i64..20) {
            let a = parse_rational(&format!("{}/{}", p * f, q * f)).unwrap();
            let b = parse_rational(&format!("{p}/{q}")).unwrap();
            prop_assert_eq!(a.numer(), b.numer());
            prop_assert_eq!(a.denom(), b.denom());
        }

        #[test]
        fn decimal_is_correctly_rounded(p in -100000i64..100000, q in 1i64..999, digits in 0usize..6) {
            let x = rat(p, q);
            let s = to_decimal(&x, digits);
            let (int_part, frac_part) = s.split_once('.').unwrap_or((&s, ""));
            let joined = format!("{int_part}{frac_part}");
            let rendered = Rational::new(BigInt::from_str(&joined).unwrap(), BigInt::from(10u32).pow(digits as u32));
            let half_ulp = Rational::new(BigInt::one(), BigInt::from(2u32) * BigInt::from(10u32).pow(digits as u32));
            prop_assert!((rendered - &x).abs() <= half_ulp);
        }
    }
}
