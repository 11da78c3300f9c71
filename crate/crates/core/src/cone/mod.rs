//! Exact polyhedral cones in coordinate space.
//!
//! A cone carries a generator list, an inequality list (`h·x ≤ 0`), or both.
//! Missing representations are computed on first use by double description
//! and cached, so a `PolyCone` is still an immutable value from the
//! outside. Lineality enters both lists as `±` pairs.

pub mod dd;
pub mod lp;
mod lp_int;

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::{dot, Scalar};

pub use dd::{canonical, dd_rays};
pub use lp::{lp_solve, LinearProgram, LpOutcome, Relation, VarKind};

pub type Vector = Vec<Scalar>;

pub fn zeros(n: usize) -> Vector {
    vec![Scalar::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut e = zeros(n);
    e[i] = Scalar::one();
    e
}

pub fn negate(v: &[Scalar]) -> Vector {
    v.iter().map(|x| -x).collect()
}

pub fn hadamard(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(Scalar::is_zero)
}

fn dedup_canonical(vs: impl IntoIterator<Item = Vector>) -> Vec<Vector> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for v in vs {
        if is_zero_vec(&v) {
            continue;
        }
        let c = canonical(v);
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    data: Vec<Vector>,
}

impl LinearMap {
    pub fn new(data: Vec<Vector>, cols: usize) -> Result<Self> {
        if let Some(bad) = data.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        Ok(LinearMap { rows: data.len(), cols, data })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap { rows: n, cols: n, data: (0..n).map(|i| unit(n, i)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i]
    }

    pub fn apply(&self, x: &[Scalar]) -> Vector {
        self.data.iter().map(|r| dot(r, x)).collect()
    }

    /// `hᵀ L`, the pull-back of a row functional.
    pub fn pull_back(&self, h: &[Scalar]) -> Vector {
        let mut out = zeros(self.cols);
        for (hi, row) in h.iter().zip(&self.data) {
            if hi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o += &(hi * a);
                }
            }
        }
        out
    }
}

/// Why an inclusion `inner ⊆ outer` fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    /// A point of the inner cone outside the outer one.
    pub point: Vector,
    /// An inequality of the outer cone violated by `point`.
    pub violated: Vector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    /// The left cone has a point outside the right cone.
    LeftNotInRight(Separation),
    RightNotInLeft(Separation),
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal)
    }
}

#[derive(Clone)]
pub struct PolyCone {
    dim: usize,
    gens: OnceLock<Vec<Vector>>,
    ineqs: OnceLock<Vec<Vector>>,
}

impl fmt::Debug for PolyCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolyCone")
            .field("dim", &self.dim)
            .field("gens", &self.gens.get().map(Vec::len))
            .field("ineqs", &self.ineqs.get().map(Vec::len))
            .finish()
    }
}

impl PolyCone {
    fn check(dim: usize, vs: &[Vector]) -> Result<()> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = vs.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Ok(())
    }

    pub fn from_gens(dim: usize, gens: Vec<Vector>) -> Result<Self> {
        Self::check(dim, &gens)?;
        let cone = PolyCone { dim, gens: OnceLock::new(), ineqs: OnceLock::new() };
        let _ = cone.gens.set(dedup_canonical(gens));
        Ok(cone)
    }

    pub fn from_ineqs(dim: usize, ineqs: Vec<Vector>) -> Result<Self> {
        Self::check(dim, &ineqs)?;
        let cone = PolyCone { dim, gens: OnceLock::new(), ineqs: OnceLock::new() };
        let _ = cone.ineqs.set(dedup_canonical(ineqs));
        Ok(cone)
    }

    /// Both representations supplied by the caller, who vouches they agree.
    pub fn from_both(dim: usize, gens: Vec<Vector>, ineqs: Vec<Vector>) -> Result<Self> {
        Self::check(dim, &gens)?;
        Self::check(dim, &ineqs)?;
        let cone = PolyCone { dim, gens: OnceLock::new(), ineqs: OnceLock::new() };
        let _ = cone.gens.set(dedup_canonical(gens));
        let _ = cone.ineqs.set(dedup_canonical(ineqs));
        Ok(cone)
    }

    pub fn full(dim: usize) -> Result<Self> {
        Self::from_both(dim, (0..dim).flat_map(|i| [unit(dim, i), negate(&unit(dim, i))]).collect(), vec![])
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::from_both(dim, vec![], (0..dim).flat_map(|i| [unit(dim, i), negate(&unit(dim, i))]).collect())
    }

    pub fn nonnegative(dim: usize) -> Result<Self> {
        Self::from_both(dim, (0..dim).map(|i| unit(dim, i)).collect(), (0..dim).map(|i| negate(&unit(dim, i))).collect())
    }

    pub fn nonpositive(dim: usize) -> Result<Self> {
        Self::from_both(dim, (0..dim).map(|i| negate(&unit(dim, i))).collect(), (0..dim).map(|i| unit(dim, i)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_gens(&self) -> bool {
        self.gens.get().is_some()
    }

    pub fn has_ineqs(&self) -> bool {
        self.ineqs.get().is_some()
    }

    /// Generators (computed by double description when absent).
    pub fn gens(&self) -> &[Vector] {
        self.gens.get_or_init(|| {
            let rows = self.ineqs.get().expect("cone without representation");
            dd_rays(self.dim, rows).generators()
        })
    }

    /// Inequalities `h·x ≤ 0` (computed by double description when absent).
    pub fn ineqs(&self) -> &[Vector] {
        self.ineqs.get_or_init(|| {
            let gens = self.gens.get().expect("cone without representation");
            dd_rays(self.dim, gens).generators()
        })
    }

    /// Both representations, each minimal.
    pub fn dd_convert(&self) -> PolyCone {
        let (gens, ineqs) = if let Some(g) = self.gens.get() {
            let ineqs = dd_rays(self.dim, g).generators();
            let gens = dd_rays(self.dim, &ineqs).generators();
            (gens, ineqs)
        } else {
            let gens = dd_rays(self.dim, self.ineqs()).generators();
            let ineqs = dd_rays(self.dim, &gens).generators();
            (gens, ineqs)
        };
        PolyCone { dim: self.dim, gens: OnceLock::from(gens), ineqs: OnceLock::from(ineqs) }
    }

    /// Membership via the inequality list when present, otherwise by an LP
    /// over nonnegative generator weights.
    pub fn contains(&self, x: &[Scalar]) -> bool {
        assert_eq!(x.len(), self.dim, "dimension mismatch in membership");
        if let Some(rows) = self.ineqs.get() {
            return rows.iter().all(|h| !dot(h, x).is_positive());
        }
        let gens = self.gens();
        if is_zero_vec(x) {
            return true;
        }
        if gens.is_empty() {
            return false;
        }
        let mut lp = LinearProgram::nonneg(gens.len());
        for i in 0..self.dim {
            lp.constrain(gens.iter().map(|g| g[i].clone()).collect(), Relation::Eq, x[i].clone());
        }
        lp.solve().is_feasible()
    }

    /// First inequality violated by `x`, if any.
    pub fn violated_by(&self, x: &[Scalar]) -> Option<&Vector> {
        self.ineqs().iter().find(|h| dot(h, x).is_positive())
    }

    /// Checks `other ⊆ self`, returning a separating certificate on failure.
    pub fn includes(&self, other: &PolyCone) -> std::result::Result<(), Separation> {
        assert_eq!(self.dim, other.dim, "dimension mismatch in inclusion");
        if other.has_gens() || !other.has_ineqs() {
            // an outer cone known by generators only is tested by LP; its
            // inequalities are computed just for the certificate
            let by_lp = !self.has_ineqs();
            for g in other.gens() {
                if by_lp && self.contains(g) {
                    continue;
                }
                if let Some(h) = self.violated_by(g) {
                    return Err(Separation { point: g.clone(), violated: h.clone() });
                }
            }
            return Ok(());
        }
        // inner cone known only by inequalities: maximize each outer row over it
        let inner = other.ineqs();
        for h in self.ineqs() {
            let mut lp = LinearProgram::free(self.dim);
            lp.maximize(h.clone());
            for row in inner {
                lp.constrain(row.clone(), Relation::Le, Scalar::zero());
            }
            lp.constrain(h.clone(), Relation::Le, Scalar::one());
            if let LpOutcome::Optimal { value, point } = lp.solve() {
                if value.is_positive() {
                    return Err(Separation { point, violated: h.clone() });
                }
            }
        }
        Ok(())
    }

    pub fn compare(&self, other: &PolyCone) -> Comparison {
        if let Err(sep) = other.includes(self) {
            return Comparison::LeftNotInRight(sep);
        }
        if let Err(sep) = self.includes(other) {
            return Comparison::RightNotInLeft(sep);
        }
        Comparison::Equal
    }

    pub fn equals(&self, other: &PolyCone) -> bool {
        self.compare(other).is_equal()
    }

    /// Stable text dump: one vector per line, sorted.
    pub fn dump(&self) -> String {
        let fmt_vec = |v: &Vector| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let mut gens: Vec<&Vector> = self.gens().iter().collect();
        gens.sort();
        out.push_str(&format!("dim {}\ngenerators {}\n", self.dim, gens.len()));
        for g in gens {
            out.push_str(&fmt_vec(g));
            out.push('\n');
        }
        let mut rows: Vec<&Vector> = self.ineqs().iter().collect();
        rows.sort();
        out.push_str(&format!("inequalities {}\n", rows.len()));
        for h in rows {
            out.push_str(&fmt_vec(h));
            out.push('\n');
        }
        out
    }
}

/// `{Z : Σ w_k z_k x_k ≤ 0 for all x ∈ C}`.
pub fn dual_cone(c: &PolyCone, weights: &[Scalar]) -> Result<PolyCone> {
    if weights.len() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: weights.len() });
    }
    if weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::Invalid("pairing weights must be strictly positive".into()));
    }
    PolyCone::from_ineqs(c.dim(), c.gens().iter().map(|g| hadamard(weights, g)).collect())
}

/// Finite sums of polyhedral cones are closed; no closure step is needed.
pub fn minkowski_sum(cones: &[&PolyCone]) -> Result<PolyCone> {
    let dim = cones.first().ok_or_else(|| Error::Invalid("empty Minkowski sum".into()))?.dim();
    if let Some(bad) = cones.iter().find(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
    }
    PolyCone::from_gens(dim, cones.iter().flat_map(|c| c.gens().iter().cloned()).collect())
}

pub fn intersect(cones: &[&PolyCone]) -> Result<PolyCone> {
    let dim = cones.first().ok_or_else(|| Error::Invalid("empty intersection".into()))?.dim();
    if let Some(bad) = cones.iter().find(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
    }
    PolyCone::from_ineqs(dim, cones.iter().flat_map(|c| c.ineqs().iter().cloned()).collect())
}

pub fn linear_image(map: &LinearMap, c: &PolyCone) -> Result<PolyCone> {
    if map.cols() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: map.cols() });
    }
    PolyCone::from_gens(map.rows(), c.gens().iter().map(|g| map.apply(g)).collect())
}

pub fn linear_preimage(map: &LinearMap, c: &PolyCone) -> Result<PolyCone> {
    if map.rows() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: map.rows() });
    }
    PolyCone::from_ineqs(map.cols(), c.ineqs().iter().map(|h| map.pull_back(h)).collect())
}
