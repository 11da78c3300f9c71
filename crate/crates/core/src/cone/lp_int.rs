//! Fraction-free simplex for LPs with rational data.
//!
//! Each row is scaled to integers and its basic column rescaled to 1, so
//! the tableau holds integers `T` with the true tableau equal to `T / d`.
//! A pivot on `(r, c)` replaces every other row by
//! `(T[r][c]·T[i] − T[i][c]·T[r]) / d` (the division is exact) and sets
//! `d = T[r][c]`. Entries stay subdeterminants of the input, so no gcd is
//! ever taken. Pivot choices are the same as in the rational tableau.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(super) struct IntTableau {
    rows: Vec<Vec<BigInt>>,
    basis: Vec<usize>,
    cols: usize,
    first_artificial: usize,
    d: BigInt,
    /// Row scale `s_i`: the basic variable of row `i` is `s_i` times the
    /// original one.
    scale: Vec<BigInt>,
}

pub(super) enum IntOutcome {
    /// Standard-form structural values below `first_artificial`.
    Optimal(Vec<BigRational>),
    Unbounded,
    Infeasible,
}

fn lcm_of<'a>(xs: impl Iterator<Item = &'a BigRational>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn to_int(x: &BigRational, scale: &BigInt) -> BigInt {
    x.numer() * (scale / x.denom())
}

impl IntTableau {
    pub(super) fn new(rows: &[Vec<BigRational>], basis: Vec<usize>, cols: usize, first_artificial: usize) -> Self {
        let mut int_rows = Vec::with_capacity(rows.len());
        let mut scale = Vec::with_capacity(rows.len());
        for (row, &b) in rows.iter().zip(&basis) {
            let s = lcm_of(row.iter());
            let mut r: Vec<BigInt> = row.iter().map(|x| to_int(x, &s)).collect();
            r[b] = BigInt::one();
            int_rows.push(r);
            scale.push(s);
        }
        IntTableau { rows: int_rows, basis, cols, first_artificial, d: BigInt::one(), scale }
    }

    /// Integer reduced-cost row `d·c − Σ_i c_{B_i} T_i` for an integer cost.
    fn cost_row(&self, cost: &[BigInt]) -> Vec<BigInt> {
        let mut z: Vec<BigInt> = cost.iter().map(|c| c * &self.d).collect();
        z.push(BigInt::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (zj, tj) in z.iter_mut().zip(row) {
                if !tj.is_zero() {
                    *zj -= cb * tj;
                }
            }
        }
        z
    }

    fn pivot(&mut self, z: &mut Vec<BigInt>, r: usize, c: usize) {
        if self.rows[r][c].is_negative() {
            for x in self.rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        let p = self.rows[r][c].clone();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let d = &self.d;
        let update = |row: &mut Vec<BigInt>| {
            let f = row[c].clone();
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                let mut v = &p * &*x;
                if !f.is_zero() && !pr.is_zero() {
                    v -= &f * pr;
                }
                *x = if v.is_zero() { v } else { v / d };
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                update(row);
            }
        }
        update(z);
        self.rows[r] = pivot_row;
        self.d = p;
        self.basis[r] = c;
    }

    /// Maximizes over columns `< allowed`; false when unbounded.
    fn optimize(&mut self, z: &mut Vec<BigInt>, allowed: usize) -> bool {
        let rhs = self.cols;
        loop {
            let Some(enter) = (0..allowed).find(|&j| z[j].is_positive() && !self.basis.contains(&j)) else {
                return true;
            };
            let mut best: Option<usize> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(bi) => {
                        let lhs = &row[rhs] * &self.rows[bi][enter];
                        let rhs_v = &self.rows[bi][rhs] * &row[enter];
                        lhs < rhs_v || (lhs == rhs_v && self.basis[i] < self.basis[bi])
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            match best {
                None => return false,
                Some(r) => self.pivot(z, r, enter),
            }
        }
    }

    /// `objective` is over standard-form columns (structural and slack).
    pub(super) fn run(mut self, objective: &[BigRational]) -> IntOutcome {
        let rhs = self.cols;
        if self.first_artificial < self.cols {
            // maximize −Σ original artificials = −Σ_i art'_i / s_i
            let big = lcm_of_ints(&self.scale);
            let mut cost = vec![BigInt::zero(); self.cols];
            for (i, &b) in self.basis.iter().enumerate() {
                if b >= self.first_artificial {
                    cost[b] = -(&big / &self.scale[i]);
                }
            }
            let mut z = self.cost_row(&cost);
            self.optimize(&mut z, self.cols);
            let infeasible =
                self.rows.iter().zip(&self.basis).any(|(row, &b)| b >= self.first_artificial && !row[rhs].is_zero());
            if infeasible {
                return IntOutcome::Infeasible;
            }
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(&mut z, i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            self.scale.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        // structural columns keep their meaning; slack columns only matter by sign
        let l = lcm_of(objective.iter());
        let mut cost: Vec<BigInt> = objective.iter().map(|c| to_int(c, &l)).collect();
        cost.resize(self.cols, BigInt::zero());
        let mut z = self.cost_row(&cost);
        if !self.optimize(&mut z, self.first_artificial) {
            return IntOutcome::Unbounded;
        }
        let mut x = vec![BigRational::zero(); self.first_artificial];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.first_artificial {
                x[b] = BigRational::new(row[rhs].clone(), self.d.clone());
            }
        }
        IntOutcome::Optimal(x)
    }
}

fn lcm_of_ints(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x))
}
