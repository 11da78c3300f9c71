//! Numéraire vectors, portfolio cones and the one-period slices `K_t`.
//!
//! Portfolio coordinates use the flat layout of [`RandomVec`]: holding `k`
//! on atom `ω` sits at index `ω·(d+1) + k`.

use crate::cone::{intersect, linear_preimage, negate, unit, zeros, LinearMap, PolyCone, Separation, Vector};
use crate::error::{Error, Result};
use crate::field::{dot, Scalar};
use crate::risk::RiskMeasure;
use crate::space::{FilteredSpace, RandomVec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumeraireVec {
    v: RandomVec,
}

impl NumeraireVec {
    /// Requires `v⁰ ≡ 1` and strictly positive entries.
    pub fn new(v: RandomVec) -> Result<Self> {
        for a in 0..v.atoms() {
            if !v.get(a, 0).is_one() {
                return Err(Error::Invalid(format!("cash numéraire is not 1 on atom {a}")));
            }
            if let Some(k) = (0..v.width()).find(|&k| !v.get(a, k).is_positive()) {
                return Err(Error::Invalid(format!("numéraire {k} is not strictly positive on atom {a}")));
            }
        }
        Ok(NumeraireVec { v })
    }

    pub fn cash(atoms: usize) -> Self {
        NumeraireVec { v: RandomVec::scalar(vec![Scalar::one(); atoms]) }
    }

    pub fn from_columns(columns: &[Vec<Scalar>]) -> Result<Self> {
        Self::new(RandomVec::from_columns(columns)?)
    }

    pub fn values(&self) -> &RandomVec {
        &self.v
    }

    pub fn width(&self) -> usize {
        self.v.width()
    }

    pub fn atoms(&self) -> usize {
        self.v.atoms()
    }

    /// The map `Y ↦ Y·V` from portfolio to claim coordinates.
    pub fn value_map(&self) -> LinearMap {
        let n = self.atoms();
        let w = self.width();
        let rows = (0..n)
            .map(|a| {
                let mut r = zeros(n * w);
                for k in 0..w {
                    r[a * w + k] = self.v.get(a, k).clone();
                }
                r
            })
            .collect();
        LinearMap::new(rows, n * w).expect("consistent shape")
    }

    /// Maps a claim-space density `z̃` to the portfolio-space vector `z̃ V`.
    pub fn lift(&self, z: &[Scalar]) -> Vector {
        let w = self.width();
        let mut out = Vec::with_capacity(z.len() * w);
        for (a, za) in z.iter().enumerate() {
            for k in 0..w {
                out.push(za * self.v.get(a, k));
            }
        }
        out
    }
}

pub fn portfolio_value(y: &RandomVec, v: &NumeraireVec) -> Result<RandomVec> {
    if y.width() != v.width() {
        return Err(Error::WidthMismatch { expected: v.width(), found: y.width() });
    }
    if y.atoms() != v.atoms() {
        return Err(Error::DimensionMismatch { expected: v.atoms(), found: y.atoms() });
    }
    Ok(RandomVec::scalar((0..y.atoms()).map(|a| dot(y.row(a), v.values().row(a))).collect()))
}

/// `D(V) = {Y : Y·V ∈ D}`.
///
/// When `D` has generators they are lifted directly: `v⁰ ≡ 1`, so `D(V)` is
/// spanned by the cash positions `g ⊗ e_0` and the null portfolios
/// `±(e_{ω,k} − v^k_ω e_{ω,0})`.
pub fn portfolio_cone(d: &PolyCone, v: &NumeraireVec) -> Result<PolyCone> {
    let pre = linear_preimage(&v.value_map(), d)?;
    if !d.has_gens() {
        return Ok(pre);
    }
    let n = v.atoms();
    let w = v.width();
    let mut gens: Vec<Vector> = d
        .gens()
        .iter()
        .map(|g| {
            let mut y = zeros(n * w);
            for (a, x) in g.iter().enumerate() {
                y[a * w] = x.clone();
            }
            y
        })
        .collect();
    for a in 0..n {
        for k in 1..w {
            let mut y = zeros(n * w);
            y[a * w + k] = Scalar::one();
            y[a * w] = -v.values().get(a, k);
            gens.push(negate(&y));
            gens.push(y);
        }
    }
    PolyCone::from_both(n * w, gens, pre.ineqs().to_vec())
}

/// `F_t`-measurable width-`w` vectors, with both representations built
/// directly: `±(e_k ⊗ 1_B)` generators and equality rows inside blocks.
pub fn measurable_subspace(space: &FilteredSpace, t: usize, width: usize) -> Result<PolyCone> {
    let dim = space.atoms() * width;
    let mut gens = Vec::new();
    let mut rows = Vec::new();
    for block in space.partition(t).blocks() {
        for k in 0..width {
            let mut g = zeros(dim);
            for &a in block {
                g[a * width + k] = Scalar::one();
            }
            gens.push(negate(&g));
            gens.push(g);
            for pair in block.windows(2) {
                let mut h = unit(dim, pair[0] * width + k);
                h[pair[1] * width + k] = Scalar::from_int(-1);
                rows.push(negate(&h));
                rows.push(h);
            }
        }
    }
    PolyCone::from_both(dim, gens, rows)
}

/// `K_t(A, V) = A_t(V) ∩ L∞(F_{t+1}; R^{d+1})`.
pub fn k_cone(rm: &RiskMeasure, v: &NumeraireVec, t: usize) -> Result<PolyCone> {
    let space = rm.space();
    if t >= space.horizon() {
        return Err(Error::Invalid(format!("K_t needs t < T = {}", space.horizon())));
    }
    let at = rm.acceptance_cone(t)?;
    let pc = portfolio_cone(&at, v)?;
    let sub = measurable_subspace(space, t + 1, v.width())?;
    intersect(&[&pc, &sub])
}

/// `A_0(V)*` built from the representing set via `z̃ ↦ z̃V`, with both
/// representations read off the measure cone.
pub fn lifted_dual(rm: &RiskMeasure, v: &NumeraireVec) -> Result<PolyCone> {
    let p = rm.polytope()?;
    let space = rm.space();
    let n = space.atoms();
    let w = v.width();
    let cone = p.measure_cone();
    let density = |q: &Vector| -> Vector { q.iter().zip(space.probs()).map(|(x, pr)| x / pr).collect() };
    let gens: Vec<Vector> = cone.gens().iter().map(|q| v.lift(&density(q))).collect();
    // rows on the cash coordinate: h·q = Σ h_ω p_ω z_{ω,0}
    let mut rows: Vec<Vector> = Vec::new();
    for h in cone.ineqs() {
        let mut r = zeros(n * w);
        for a in 0..n {
            r[a * w] = &h[a] * &space.probs()[a];
        }
        rows.push(r);
    }
    // z_{ω,k} = v^k_ω z_{ω,0}
    for a in 0..n {
        for k in 1..w {
            let mut r = zeros(n * w);
            r[a * w + k] = Scalar::one();
            r[a * w] = -v.values().get(a, k);
            rows.push(negate(&r));
            rows.push(r);
        }
    }
    PolyCone::from_both(n * w, gens, rows)
}

#[derive(Clone, Debug)]
pub struct SackVReport {
    pub holds: bool,
    /// Present when the two sides differ: which side has the extra point.
    pub separation: Option<(String, Separation)>,
}

/// Compares `D(V)*` with `{z̃V : z̃ ∈ D*}`; equal for every claim cone `D`.
pub fn sackv_check(space: &FilteredSpace, d: &PolyCone, v: &NumeraireVec) -> Result<SackVReport> {
    use crate::cone::{dual_cone, Comparison};
    let w = v.width();
    let left = dual_cone(&portfolio_cone(d, v)?, &space.weights(w))?;
    let d_star = dual_cone(d, space.probs())?;
    let right = PolyCone::from_gens(space.atoms() * w, d_star.gens().iter().map(|z| v.lift(z)).collect())?;
    Ok(match left.compare(&right) {
        Comparison::Equal => SackVReport { holds: true, separation: None },
        Comparison::LeftNotInRight(s) => {
            SackVReport { holds: false, separation: Some(("D(V)* has a point outside D*V".into(), s)) }
        }
        Comparison::RightNotInLeft(s) => {
            SackVReport { holds: false, separation: Some(("D*V has a point outside D(V)*".into(), s)) }
        }
    })
}
