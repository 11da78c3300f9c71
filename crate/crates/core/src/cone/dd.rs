//! Double description: generators of `{x : h·x ≤ 0 for every row h}`.
//!
//! The iteration starts from the whole space (lineality = standard basis, no
//! rays) and inserts rows in order of increasing support size. A row that
//! cuts the current lineality space removes one lineality direction and turns
//! it into a ray; otherwise the classical step keeps rays on the nonpositive
//! side and combines adjacent pairs across the hyperplane.
//!
//! Adjacency is decided combinatorially: rays `p`, `n` are adjacent iff no
//! third ray is tight on every row on which both are tight. With a minimal
//! ray set this is equivalent to the algebraic rank test and needs no
//! arithmetic. A cardinality bound on the common tight set prunes first.

use crate::field::{dot, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn contains(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

/// Scales so that the first nonzero coordinate has absolute value 1.
pub fn canonical(mut v: Vec<Scalar>) -> Vec<Scalar> {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()) {
        let s = lead.abs();
        if !s.is_one() {
            let inv = s.recip().unwrap();
            for x in v.iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
        }
    }
    v
}

fn axpy(y: &mut [Scalar], a: &Scalar, x: &[Scalar]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi += &(a * xi);
        }
    }
}

/// Output of the double description iteration.
#[derive(Clone, Debug)]
pub struct DdResult {
    /// Basis of the lineality space.
    pub lineality: Vec<Vec<Scalar>>,
    /// Extreme rays modulo lineality.
    pub rays: Vec<Vec<Scalar>>,
}

impl DdResult {
    /// Rays followed by `±` lineality pairs.
    pub fn generators(self) -> Vec<Vec<Scalar>> {
        let mut out = self.rays;
        for l in self.lineality {
            let neg: Vec<Scalar> = l.iter().map(|x| -x).collect();
            out.push(l);
            out.push(neg);
        }
        out
    }
}

pub fn dd_rays(dim: usize, rows: &[Vec<Scalar>]) -> DdResult {
    let mut order: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].iter().any(|x| !x.is_zero())).collect();
    order.sort_by_key(|&i| (rows[i].iter().filter(|x| !x.is_zero()).count(), i));
    let total = order.len();

    let mut lineality: Vec<Vec<Scalar>> = (0..dim)
        .map(|i| {
            let mut e = vec![Scalar::zero(); dim];
            e[i] = Scalar::one();
            e
        })
        .collect();
    let mut rays: Vec<(Vec<Scalar>, Bits)> = Vec::new();

    for (step, &ri) in order.iter().enumerate() {
        let h = &rows[ri];
        if let Some(li) = lineality.iter().position(|l| !dot(h, l).is_zero()) {
            let l = lineality.remove(li);
            let a = dot(h, &l);
            for other in lineality.iter_mut() {
                let c = dot(h, other);
                if !c.is_zero() {
                    axpy(other, &(-(&c / &a)), &l);
                }
            }
            for (r, z) in rays.iter_mut() {
                let c = dot(h, r);
                if !c.is_zero() {
                    axpy(r, &(-(&c / &a)), &l);
                    *r = canonical(std::mem::take(r));
                }
                z.set(step);
            }
            let dir: Vec<Scalar> = if a.is_positive() { l.iter().map(|x| -x).collect() } else { l };
            // tight on every earlier row, since those annihilate the lineality space
            let mut z = Bits::new(total);
            for k in 0..step {
                z.set(k);
            }
            rays.push((canonical(dir), z));
            continue;
        }

        let values: Vec<Scalar> = rays.iter().map(|(r, _)| dot(h, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        if pos.is_empty() {
            for (i, (_, z)) in rays.iter_mut().enumerate() {
                if values[i].is_zero() {
                    z.set(step);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let pointed_dim = dim - lineality.len();
        let threshold = pointed_dim.saturating_sub(2);

        let mut fresh: Vec<(Vec<Scalar>, Bits)> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].1.and(&rays[n].1);
                if common.count() < threshold {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, (_, z))| k != p && k != n && z.contains(&common));
                if blocked {
                    continue;
                }
                let mut v: Vec<Scalar> = rays[n].0.iter().map(|x| x * &values[p]).collect();
                axpy(&mut v, &(-&values[n]), &rays[p].0);
                let mut z = common;
                z.set(step);
                fresh.push((canonical(v), z));
            }
        }
        let mut kept: Vec<(Vec<Scalar>, Bits)> = Vec::with_capacity(rays.len() - pos.len() + fresh.len());
        for (i, (r, mut z)) in rays.into_iter().enumerate() {
            if values[i].is_positive() {
                continue;
            }
            if values[i].is_zero() {
                z.set(step);
            }
            kept.push((r, z));
        }
        kept.extend(fresh);
        rays = kept;
    }

    let rays = rays.into_iter().map(|(r, _)| r).collect();
    let lineality = lineality.into_iter().map(canonical).collect();
    DdResult { lineality, rays }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::q;

    fn v(xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|x| q(x)).collect()
    }

    #[test]
    fn orthant_from_inequalities() {
        let rows = vec![v(&["-1", "0", "0"]), v(&["0", "-1", "0"]), v(&["0", "0", "-1"])];
        let out = dd_rays(3, &rows);
        assert!(out.lineality.is_empty());
        let mut rays = out.rays;
        rays.sort();
        assert_eq!(rays, vec![v(&["0", "0", "1"]), v(&["0", "1", "0"]), v(&["1", "0", "0"])]);
    }

    #[test]
    fn halfspace_keeps_a_line() {
        let out = dd_rays(2, &[v(&["1", "1"])]);
        assert_eq!(out.lineality.len(), 1);
        assert_eq!(out.rays.len(), 1);
        assert_eq!(dot(&v(&["1", "1"]), &out.lineality[0]), q("0"));
        assert!(dot(&v(&["1", "1"]), &out.rays[0]).is_negative());
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        // cone over the square |x| ≤ z, |y| ≤ z
        let rows = vec![
            v(&["1", "0", "-1"]),
            v(&["-1", "0", "-1"]),
            v(&["0", "1", "-1"]),
            v(&["0", "-1", "-1"]),
        ];
        let out = dd_rays(3, &rows);
        assert!(out.lineality.is_empty());
        assert_eq!(out.rays.len(), 4);
        for r in &out.rays {
            let tight = rows.iter().filter(|h| dot(h, r).is_zero()).count();
            assert_eq!(tight, 2);
        }
    }

    #[test]
    fn contradictory_rows_give_zero_cone() {
        let out = dd_rays(1, &[v(&["1"]), v(&["-1"])]);
        assert!(out.lineality.is_empty());
        assert!(out.rays.is_empty());
    }
}
