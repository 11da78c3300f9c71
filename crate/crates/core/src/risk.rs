//! Representing sets, conditional risk `ρ_t`, acceptance cones and the
//! coherence axioms.
//!
//! `ρ_t(X) = esssup_{Q ∈ 𝒬} E_Q[X | F_t]`. On a block `B` of `F_t` only
//! members with `Q(B) > 0` contribute: along a segment from a charging
//! member to a non-charging one the conditional average on `B` stays
//! constant, so the supremum over the polytope is attained at a charging
//! vertex.

use std::sync::OnceLock;

use serde::Serialize;

use crate::cone::{canonical, dd_rays, hadamard, negate, unit, zeros, LinearProgram, LpOutcome, PolyCone, Relation, Vector};
use crate::error::{Error, Result};
use crate::field::{dot, Scalar};
use crate::lcg::Lcg;
use crate::space::{FilteredSpace, Measure, RandomVec};

/// A convex polytope of probability measures.
///
/// Built either from points (the convex hull is taken) or from homogeneous
/// rows `h·q ≤ 0`, read together with `q ≥ 0` and `Σ q = 1`. The other form
/// is derived on demand through the cone `{λq : λ ≥ 0, q ∈ 𝒬}`.
#[derive(Clone, Debug)]
pub struct Polytope {
    atoms: usize,
    points: Option<Vec<Vector>>,
    rows: Option<Vec<Vector>>,
    cone: PolyCone,
    vertices: OnceLock<Vec<Vector>>,
}

impl Polytope {
    pub fn from_vertices(atoms: usize, vertices: Vec<Vector>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Invalid("polytope without vertices".into()));
        }
        for v in &vertices {
            Measure::new(v.clone()).check_probability(atoms)?;
        }
        let cone = PolyCone::from_gens(atoms, vertices.clone())?;
        Ok(Polytope { atoms, points: Some(vertices), rows: None, cone, vertices: OnceLock::new() })
    }

    /// Rows `h` meaning `h·q ≤ 0` for probability vectors `q`.
    pub fn from_rows(atoms: usize, rows: Vec<Vector>) -> Result<Self> {
        let mut all = rows.clone();
        all.extend((0..atoms).map(|i| negate(&unit(atoms, i))));
        let cone = PolyCone::from_ineqs(atoms, all)?;
        Ok(Polytope { atoms, points: None, rows: Some(rows), cone, vertices: OnceLock::new() })
    }

    /// Non-homogeneous rows `a·q ≤ b`, homogenized with `Σ q = 1`.
    pub fn from_affine(atoms: usize, rows: &[(Vector, Scalar)]) -> Result<Self> {
        let homogeneous = rows.iter().map(|(a, b)| a.iter().map(|x| x - b).collect()).collect();
        Self::from_rows(atoms, homogeneous)
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn is_vertex_form(&self) -> bool {
        self.points.is_some()
    }

    pub fn rows(&self) -> Option<&[Vector]> {
        self.rows.as_deref()
    }

    /// `cone(𝒬)`; its polar under the plain dot product is `A_0`.
    pub fn measure_cone(&self) -> &PolyCone {
        &self.cone
    }

    /// Generating points: the given list in vertex form, else the extreme
    /// points computed from the rows.
    pub fn vertices(&self) -> &[Vector] {
        if let Some(p) = &self.points {
            return p;
        }
        self.vertices.get_or_init(|| {
            self.cone
                .gens()
                .iter()
                .map(|g| {
                    let total: Scalar = g.iter().sum();
                    g.iter().map(|x| x / &total).collect()
                })
                .collect()
        })
    }

    pub fn contains(&self, q: &[Scalar]) -> bool {
        let total: Scalar = q.iter().sum();
        total.is_one() && q.iter().all(|x| !x.is_negative()) && self.cone.contains(q)
    }

    /// Maximum of `Σ_{ω∈B} q_ω x_ω / Q(B)` over members charging `B`.
    fn block_sup(&self, block: &[usize], x: &[Scalar]) -> Option<Scalar> {
        if self.points.is_some() {
            return self
                .vertices()
                .iter()
                .filter_map(|q| {
                    let mass: Scalar = block.iter().map(|&a| &q[a]).sum();
                    if mass.is_zero() {
                        return None;
                    }
                    let num: Scalar = block.iter().map(|&a| &q[a] * &x[a]).sum();
                    Some(num / mass)
                })
                .max();
        }
        // Charnes–Cooper: the ratio is scale invariant, so fix Q(B) = 1 on the cone
        let n = self.atoms;
        let mut lp = LinearProgram::nonneg(n);
        let mut obj = zeros(n);
        let mut mass = zeros(n);
        for &a in block {
            obj[a] = x[a].clone();
            mass[a] = Scalar::one();
        }
        lp.maximize(obj);
        for h in self.rows.as_deref().unwrap_or(&[]) {
            lp.constrain(h.clone(), Relation::Le, Scalar::zero());
        }
        lp.constrain(mass, Relation::Eq, Scalar::one());
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => Some(value),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("bounded objective on a normalized slice"),
        }
    }
}

/// `{q : Σ q_ω² ≤ c}` intersected with the probability simplex, known only
/// through exact membership and a finite list of member witnesses.
#[derive(Clone, Debug)]
pub struct QuadBall {
    pub c: Scalar,
    pub witnesses: Vec<Vector>,
}

impl QuadBall {
    pub fn square_sum(q: &[Scalar]) -> Scalar {
        q.iter().map(|x| x * x).sum()
    }

    pub fn contains(&self, q: &[Scalar]) -> bool {
        let total: Scalar = q.iter().sum();
        total.is_one() && q.iter().all(|x| !x.is_negative()) && Self::square_sum(q) <= self.c
    }
}

#[derive(Clone, Debug)]
pub enum RepresentingSet {
    Polytope(Polytope),
    QuadBall(QuadBall),
}

impl RepresentingSet {
    pub fn polytope(&self) -> Result<&Polytope> {
        match self {
            RepresentingSet::Polytope(p) => Ok(p),
            RepresentingSet::QuadBall(_) => Err(Error::Unsupported(
                "a quadratic-ball representing set supports only membership and witness checks".into(),
            )),
        }
    }

    /// Finite list of known members: polytope vertices or ball witnesses.
    pub fn members(&self) -> &[Vector] {
        match self {
            RepresentingSet::Polytope(p) => p.vertices(),
            RepresentingSet::QuadBall(b) => &b.witnesses,
        }
    }

    pub fn contains(&self, q: &[Scalar]) -> bool {
        match self {
            RepresentingSet::Polytope(p) => p.contains(q),
            RepresentingSet::QuadBall(b) => b.contains(q),
        }
    }

    /// Human-readable reason why `q` is not a member (None if it is).
    pub fn explain_exclusion(&self, q: &[Scalar]) -> Option<String> {
        if self.contains(q) {
            return None;
        }
        Some(match self {
            RepresentingSet::QuadBall(b) => {
                format!("sum of squared masses {} > {}", QuadBall::square_sum(q), b.c)
            }
            RepresentingSet::Polytope(p) => match p.measure_cone().violated_by(q) {
                Some(h) => format!(
                    "violates {} ≤ 0 (value {})",
                    h.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                    dot(h, q)
                ),
                None => "not a probability measure".into(),
            },
        })
    }
}

#[derive(Clone, Debug)]
pub struct RiskMeasure {
    space: FilteredSpace,
    set: RepresentingSet,
}

impl RiskMeasure {
    /// Validates that members are probability measures on the space and
    /// that some member charges every atom.
    pub fn new(space: FilteredSpace, set: RepresentingSet) -> Result<Self> {
        let n = space.atoms();
        match &set {
            RepresentingSet::Polytope(p) => {
                if p.atoms() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: p.atoms() });
                }
                let positive = if p.is_vertex_form() {
                    (0..n).all(|a| p.vertices().iter().any(|v| v[a].is_positive()))
                } else {
                    p.contains(space.probs()) || strictly_positive_member(p)
                };
                if !positive {
                    return Err(Error::Invalid("the representing set has no strictly positive member".into()));
                }
            }
            RepresentingSet::QuadBall(b) => {
                for w in &b.witnesses {
                    Measure::new(w.clone()).check_probability(n)?;
                    if !b.contains(w) {
                        return Err(Error::Invalid("a quadratic-ball witness violates the ball".into()));
                    }
                }
                if !b.witnesses.iter().any(|w| w.iter().all(Scalar::is_positive)) {
                    return Err(Error::Invalid("no strictly positive witness in the quadratic ball".into()));
                }
            }
        }
        Ok(RiskMeasure { space, set })
    }

    pub fn space(&self) -> &FilteredSpace {
        &self.space
    }

    pub fn set(&self) -> &RepresentingSet {
        &self.set
    }

    pub fn polytope(&self) -> Result<&Polytope> {
        self.set.polytope()
    }

    /// `ρ_t(X)` for a scalar claim.
    pub fn rho(&self, t: usize, x: &RandomVec) -> Result<RandomVec> {
        let p = self.polytope()?;
        let n = self.space.atoms();
        if x.width() != 1 {
            return Err(Error::WidthMismatch { expected: 1, found: x.width() });
        }
        if x.atoms() != n || t > self.space.horizon() {
            return Err(Error::DimensionMismatch { expected: n, found: x.atoms() });
        }
        let mut out = zeros(n);
        for (b, block) in self.space.partition(t).blocks().iter().enumerate() {
            let v = p.block_sup(block, x.as_slice()).ok_or(Error::NoChargingMember { t, block: b })?;
            for &a in block {
                out[a] = v.clone();
            }
        }
        Ok(RandomVec::scalar(out))
    }

    /// `A_t`: one row `1_B ⊙ q` per vertex and `F_t` block.
    ///
    /// `A_t` is the direct sum over blocks of the polars of the restricted
    /// measure cones, so generators come block by block; on a block covering
    /// all atoms they are the measure cone's own inequalities.
    pub fn acceptance_cone(&self, t: usize) -> Result<PolyCone> {
        let p = self.polytope()?;
        let n = self.space.atoms();
        let mut rows = Vec::new();
        let mut gens = Vec::new();
        for block in self.space.partition(t).blocks() {
            let mut mask = zeros(n);
            for &a in block {
                mask[a] = Scalar::one();
            }
            for v in p.vertices() {
                rows.push(hadamard(&mask, v));
            }
            if block.len() == n {
                gens.extend(p.measure_cone().ineqs().iter().cloned());
                continue;
            }
            let mut local: Vec<Vector> = p
                .vertices()
                .iter()
                .map(|v| block.iter().map(|&a| v[a].clone()).collect::<Vector>())
                .filter(|l| l.iter().any(|x| !x.is_zero()))
                .map(canonical)
                .collect();
            local.sort();
            local.dedup();
            for h in dd_rays(block.len(), &local).generators() {
                let mut g = zeros(n);
                for (i, &a) in block.iter().enumerate() {
                    g[a] = h[i].clone();
                }
                gens.push(g);
            }
        }
        PolyCone::from_both(n, gens, rows)
    }
}

fn strictly_positive_member(p: &Polytope) -> bool {
    // maximize s subject to q_ω ≥ s, Σ q = 1, rows
    let n = p.atoms();
    let mut lp = LinearProgram::nonneg(n + 1);
    lp.maximize(unit(n + 1, n));
    for a in 0..n {
        let mut row = zeros(n + 1);
        row[a] = Scalar::from_int(-1);
        row[n] = Scalar::one();
        lp.constrain(row, Relation::Le, Scalar::zero());
    }
    let mut sum = vec![Scalar::one(); n + 1];
    sum[n] = Scalar::zero();
    lp.constrain(sum, Relation::Eq, Scalar::one());
    for h in p.rows().unwrap_or(&[]) {
        let mut row = h.clone();
        row.push(Scalar::zero());
        lp.constrain(row, Relation::Le, Scalar::zero());
    }
    matches!(lp.solve(), LpOutcome::Optimal { value, .. } if value.is_positive())
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub axiom: &'static str,
    pub checks: usize,
    pub counterexamples: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn random_claim(g: &mut Lcg, n: usize) -> RandomVec {
    RandomVec::scalar((0..n).map(|_| g.rational(-6, 6, 3)).collect())
}

fn random_measurable(g: &mut Lcg, space: &FilteredSpace, t: usize, lo: i64, hi: i64, den: i64) -> RandomVec {
    let mut out = zeros(space.atoms());
    for block in space.partition(t).blocks() {
        let v = g.rational(lo, hi, den);
        for &a in block {
            out[a] = v.clone();
        }
    }
    RandomVec::scalar(out)
}

fn add(x: &RandomVec, y: &RandomVec) -> RandomVec {
    RandomVec::scalar(x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a + b).collect())
}

fn mul(x: &RandomVec, y: &RandomVec) -> RandomVec {
    RandomVec::scalar(hadamard(x.as_slice(), y.as_slice()))
}

fn show(x: &RandomVec) -> String {
    format!("[{}]", x.as_slice().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))
}

/// Cash invariance, monotonicity, conditional convexity, normalisation and
/// positive homogeneity, each on `samples` seeded draws at every `t`.
pub fn coherence_suite(rm: &RiskMeasure, samples: usize, seed: u64) -> Result<Vec<AxiomReport>> {
    let space = rm.space();
    let n = space.atoms();
    let mut g = Lcg::new(seed);
    let names = ["cash invariance", "monotonicity", "conditional convexity", "normalisation", "positive homogeneity"];
    let mut reports: Vec<AxiomReport> =
        names.iter().map(|&axiom| AxiomReport { axiom, checks: 0, counterexamples: Vec::new() }).collect();
    let zero = RandomVec::zeros(n, 1);
    for t in 0..=space.horizon() {
        for _ in 0..samples {
            let x = random_claim(&mut g, n);
            let y = random_claim(&mut g, n);
            let m = random_measurable(&mut g, space, t, -5, 5, 4);
            let lambda = random_measurable(&mut g, space, t, 0, 4, 4);
            let mix = RandomVec::scalar(
                random_measurable(&mut g, space, t, 0, 6, 6).as_slice().iter().map(|s| s.clone().min(Scalar::one())).collect(),
            );
            let bump = RandomVec::scalar((0..n).map(|_| g.rational(0, 3, 2)).collect());
            let rx = rm.rho(t, &x)?;
            let ry = rm.rho(t, &y)?;

            let lhs = rm.rho(t, &add(&x, &m))?;
            if lhs != add(&rx, &m) {
                reports[0].counterexamples.push(format!("t={t} X={} m={}", show(&x), show(&m)));
            }
            reports[0].checks += 1;

            let bigger = add(&x, &bump);
            let rb = rm.rho(t, &bigger)?;
            if rx.as_slice().iter().zip(rb.as_slice()).any(|(a, b)| a > b) {
                reports[1].counterexamples.push(format!("t={t} X={} Y={}", show(&x), show(&bigger)));
            }
            reports[1].checks += 1;

            let one_minus = RandomVec::scalar(mix.as_slice().iter().map(|l| &Scalar::one() - l).collect());
            let combo = add(&mul(&mix, &x), &mul(&one_minus, &y));
            let rc = rm.rho(t, &combo)?;
            let bound = add(&mul(&mix, &rx), &mul(&one_minus, &ry));
            if rc.as_slice().iter().zip(bound.as_slice()).any(|(a, b)| a > b) {
                reports[2].counterexamples.push(format!("t={t} X={} Y={} λ={}", show(&x), show(&y), show(&mix)));
            }
            reports[2].checks += 1;

            if rm.rho(t, &zero)? != zero {
                reports[3].counterexamples.push(format!("t={t} ρ(0) ≠ 0"));
            }
            reports[3].checks += 1;

            if rm.rho(t, &mul(&lambda, &x))? != mul(&lambda, &rx) {
                reports[4].counterexamples.push(format!("t={t} X={} λ={}", show(&x), show(&lambda)));
            }
            reports[4].checks += 1;
        }
    }
    Ok(reports)
}
