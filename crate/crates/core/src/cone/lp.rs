//! Exact two-phase simplex on a dense tableau.
//!
//! Pivoting follows Bland's rule throughout, so the method terminates on
//! degenerate problems and the returned vertex depends only on the input.

use num_rational::BigRational;

use super::lp_int::{IntOutcome, IntTableau};
use crate::field::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Free,
    NonNeg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Scalar>,
    pub rel: Relation,
    pub rhs: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Scalar, point: Vec<Scalar> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Scalar> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[Scalar]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

/// `maximize c·x` subject to linear constraints and per-variable sign kinds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    kinds: Vec<VarKind>,
    objective: Vec<Scalar>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(kinds: Vec<VarKind>) -> Self {
        let n = kinds.len();
        LinearProgram { kinds, objective: vec![Scalar::zero(); n], constraints: Vec::new() }
    }

    pub fn nonneg(n: usize) -> Self {
        Self::new(vec![VarKind::NonNeg; n])
    }

    pub fn free(n: usize) -> Self {
        Self::new(vec![VarKind::Free; n])
    }

    pub fn vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn maximize(&mut self, objective: Vec<Scalar>) -> &mut Self {
        assert_eq!(objective.len(), self.vars());
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Scalar>, rel: Relation, rhs: Scalar) -> &mut Self {
        assert_eq!(coeffs.len(), self.vars());
        self.constraints.push(Constraint { coeffs, rel, rhs });
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self, true)
    }

    /// The same pivots on a tableau of field elements, for cross-checks.
    pub fn solve_without_integer_path(&self) -> LpOutcome {
        Tableau::build(self).run(self, false)
    }
}

/// `maximize c·x` over free `x` with `A x ≤ b` and `E x = f`.
pub fn lp_solve(
    objective: &[Scalar],
    ineqs: &[(Vec<Scalar>, Scalar)],
    eqs: &[(Vec<Scalar>, Scalar)],
) -> LpOutcome {
    let mut lp = LinearProgram::free(objective.len());
    lp.maximize(objective.to_vec());
    for (a, b) in ineqs {
        lp.constrain(a.clone(), Relation::Le, b.clone());
    }
    for (a, b) in eqs {
        lp.constrain(a.clone(), Relation::Eq, b.clone());
    }
    lp.solve()
}

struct Tableau {
    /// Rows of `[coefficients | rhs]`.
    rows: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    /// Column count excluding the rhs.
    cols: usize,
    /// Columns `>= first_artificial` are phase-one artificials.
    first_artificial: usize,
    /// Standard-form column(s) of each original variable: (plus, minus).
    var_cols: Vec<(usize, Option<usize>)>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut var_cols = Vec::with_capacity(lp.vars());
        let mut next = 0;
        for kind in &lp.kinds {
            match kind {
                VarKind::NonNeg => {
                    var_cols.push((next, None));
                    next += 1;
                }
                VarKind::Free => {
                    var_cols.push((next, Some(next + 1)));
                    next += 2;
                }
            }
        }
        let structural = next;
        // normalize every row to a nonnegative rhs
        let normalized: Vec<(Vec<Scalar>, Relation, Scalar)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let rel = match c.rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|x| -x).collect(), rel, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.rel, c.rhs.clone())
                }
            })
            .collect();
        let slacks = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let artificials = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_artificial = structural + slacks;
        let cols = first_artificial + artificials;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut slack = structural;
        let mut art = first_artificial;
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Scalar::zero(); cols + 1];
            for (j, a) in coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let (plus, minus) = var_cols[j];
                row[plus] = a.clone();
                if let Some(m) = minus {
                    row[m] = -a;
                }
            }
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = Scalar::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = Scalar::from_int(-1);
                    slack += 1;
                    row[art] = Scalar::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Scalar::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, cols, first_artificial, var_cols }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip().expect("pivot on zero");
        if !inv.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&f * p);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j − c_B B⁻¹ A_j` for the given cost vector.
    fn reduced_costs(&self, cost: &[Scalar], allowed: usize) -> Vec<Scalar> {
        let mut red: Vec<Scalar> = cost[..allowed].to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in red.iter_mut().enumerate() {
                if !row[j].is_zero() {
                    *r -= &(cb * &row[j]);
                }
            }
        }
        red
    }

    /// Maximizes `cost·x` over columns `< allowed`; false when unbounded.
    fn optimize(&mut self, cost: &[Scalar], allowed: usize) -> bool {
        loop {
            let red = self.reduced_costs(cost, allowed);
            let Some(enter) = (0..allowed).find(|&j| red[j].is_positive() && !self.basis.contains(&j))
            else {
                return true;
            };
            let rhs = self.cols;
            let mut best: Option<(usize, Scalar)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn standard_objective(&self, lp: &LinearProgram) -> Vec<Scalar> {
        let mut cost = vec![Scalar::zero(); self.first_artificial];
        for (j, c) in lp.objective.iter().enumerate() {
            let (plus, minus) = self.var_cols[j];
            cost[plus] = c.clone();
            if let Some(m) = minus {
                cost[m] = -c;
            }
        }
        cost
    }

    fn finish(&self, lp: &LinearProgram, std_x: &[Scalar]) -> LpOutcome {
        let point: Vec<Scalar> = self
            .var_cols
            .iter()
            .map(|&(plus, minus)| match minus {
                Some(m) => &std_x[plus] - &std_x[m],
                None => std_x[plus].clone(),
            })
            .collect();
        let value = crate::field::dot(&lp.objective, &point);
        LpOutcome::Optimal { value, point }
    }

    /// Runs the fraction-free tableau when every entry is rational.
    fn run_integer(&self, lp: &LinearProgram) -> Option<LpOutcome> {
        let rows: Vec<Vec<BigRational>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.as_rational().cloned()).collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()?;
        let objective: Vec<BigRational> =
            self.standard_objective(lp).iter().map(|x| x.as_rational().cloned()).collect::<Option<_>>()?;
        let t = IntTableau::new(&rows, self.basis.clone(), self.cols, self.first_artificial);
        Some(match t.run(&objective) {
            IntOutcome::Infeasible => LpOutcome::Infeasible,
            IntOutcome::Unbounded => LpOutcome::Unbounded,
            IntOutcome::Optimal(x) => {
                let std_x: Vec<Scalar> = x.into_iter().map(Scalar::from).collect();
                self.finish(lp, &std_x)
            }
        })
    }

    fn run(mut self, lp: &LinearProgram, integer: bool) -> LpOutcome {
        if integer {
            if let Some(out) = self.run_integer(lp) {
                return out;
            }
        }
        let rhs = self.cols;
        if self.first_artificial < self.cols {
            let mut cost = vec![Scalar::zero(); self.cols];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = Scalar::from_int(-1);
            }
            self.optimize(&cost, self.cols);
            let infeasible = self
                .rows
                .iter()
                .zip(&self.basis)
                .any(|(row, &b)| b >= self.first_artificial && !row[rhs].is_zero());
            if infeasible {
                return LpOutcome::Infeasible;
            }
            // drive zero-level artificials out of the basis, dropping redundant rows
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut cost = self.standard_objective(lp);
        cost.resize(self.cols, Scalar::zero());
        if !self.optimize(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut std_x = vec![Scalar::zero(); self.cols];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            std_x[b] = row[rhs].clone();
        }
        self.finish(lp, &std_x)
    }
}
