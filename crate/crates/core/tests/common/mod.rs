//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's LP or double description code.
#![allow(dead_code)]

use conerisk::field::Scalar;
use conerisk::lcg::Lcg;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Vector = Vec<Scalar>;

pub fn vec_of(xs: &[&str]) -> Vector {
    xs.iter().map(|x| conerisk::field::q(x)).collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the square system `A x = b` by Gaussian elimination; `None` when
/// `A` is singular.
pub fn solve_square(a: &[Vector], b: &[Scalar]) -> Option<Vector> {
    let n = a.len();
    let mut m: Vec<Vector> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Rank of a list of vectors.
pub fn rank(rows: &[Vector]) -> usize {
    let mut m: Vec<Vector> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let pr = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pr) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Maximum of `c·x` over a bounded polytope `{A x ≤ b}` in dimension ≤ 4,
/// by enumerating every basic solution. `None` when the polytope is empty.
pub fn brute_force_max(c: &[Scalar], rows: &[(Vector, Scalar)]) -> Option<Scalar> {
    let d = c.len();
    let mut best: Option<Scalar> = None;
    for pick in subsets(rows.len(), d) {
        let a: Vec<Vector> = pick.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Scalar> = pick.iter().map(|&i| rows[i].1.clone()).collect();
        let Some(x) = solve_square(&a, &b) else { continue };
        if rows.iter().all(|(h, r)| dot(h, &x) <= *r) {
            let v = dot(c, &x);
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
    }
    best
}

pub fn random_vector(g: &mut Lcg, dim: usize, lo: i64, hi: i64, den: i64) -> Vector {
    (0..dim).map(|_| g.rational(lo, hi, den)).collect()
}

/// `⌊√2 · 10^digits⌋` by integer square root.
pub fn sqrt2_scaled(digits: u32) -> BigInt {
    (BigInt::from(2) * BigInt::from(10).pow(2 * digits)).sqrt()
}

/// Sign of `a + b√2` read off a decimal approximation with `digits`
/// fractional digits; `None` when the approximation cannot tell.
pub fn decimal_sign(a: &BigRational, b: &BigRational, digits: u32) -> Option<std::cmp::Ordering> {
    let scale = BigInt::from(10).pow(digits);
    let s = sqrt2_scaled(digits);
    // a + b√2 lies in a·10^k + b·[s, s+1], all over 10^k
    let base = BigRational::from_integer(scale.clone()) * a;
    let lo_hi = [b * BigRational::from_integer(s.clone()), b * BigRational::from_integer(s + 1)];
    let (lo, hi) = if lo_hi[0] <= lo_hi[1] { (&lo_hi[0], &lo_hi[1]) } else { (&lo_hi[1], &lo_hi[0]) };
    let lo = &base + lo;
    let hi = &base + hi;
    if lo.is_positive() {
        Some(std::cmp::Ordering::Greater)
    } else if hi.is_negative() {
        Some(std::cmp::Ordering::Less)
    } else if lo.is_zero() && hi.is_zero() {
        Some(std::cmp::Ordering::Equal)
    } else {
        None
    }
}
