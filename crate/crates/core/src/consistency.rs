//! Primal-side checkers: `ε_t`, predictable `V`-time-consistency,
//! predictable representability, the three-way report and decomposition.

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{linear_image, minkowski_sum, zeros, Comparison, LinearProgram, LpOutcome, Relation, Separation, Vector};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::market::{k_cone, portfolio_cone, portfolio_value, NumeraireVec};
use crate::risk::RiskMeasure;
use crate::space::RandomVec;
use crate::stability::{dual_stability, vstability_witness_search, StabilityVerdict, Witness};

fn check_claim(rm: &RiskMeasure, x: &RandomVec) -> Result<()> {
    if x.width() != 1 {
        return Err(Error::WidthMismatch { expected: 1, found: x.width() });
    }
    if x.atoms() != rm.space().atoms() {
        return Err(Error::DimensionMismatch { expected: rm.space().atoms(), found: x.atoms() });
    }
    Ok(())
}

/// `ε_t(X) = essinf {ρ_t(Y·V) : Y F_{t+1}-measurable, X − Y·V ∈ A_{t+1}}`.
///
/// Solved per `F_t` block `B` as: minimize `u` over `u` and the holdings
/// `y_{C,k}` on the `F_{t+1}` blocks `C ⊆ B`, subject to
/// `E_Q[Y·V | B] ≤ u` for every vertex charging `B` and
/// `Σ_{ω∈C} q_ω (X − Y·V)_ω ≤ 0` for every vertex and `C`.
pub fn epsilon(rm: &RiskMeasure, v: &NumeraireVec, t: usize, x: &RandomVec) -> Result<RandomVec> {
    check_claim(rm, x)?;
    let space = rm.space();
    if t >= space.horizon() {
        return Err(Error::Invalid(format!("ε_t needs t < T = {}", space.horizon())));
    }
    let verts = rm.polytope()?.vertices();
    let w = v.width();
    let next = space.partition(t + 1);
    let blocks = space.partition(t).blocks();
    let values = blocks
        .par_iter()
        .map(|block| -> Result<Scalar> {
            let mut children: Vec<usize> = block.iter().map(|&a| next.block_of(a)).collect();
            children.sort_unstable();
            children.dedup();
            let nv = 1 + children.len() * w;
            let col = |ci: usize, k: usize| 1 + ci * w + k;
            let mut lp = LinearProgram::free(nv);
            let mut obj = zeros(nv);
            obj[0] = Scalar::from_int(-1);
            lp.maximize(obj);
            for q in verts {
                let mass: Scalar = block.iter().map(|&a| &q[a]).sum();
                if !mass.is_zero() {
                    let mut row = zeros(nv);
                    row[0] = -mass;
                    for (ci, &c) in children.iter().enumerate() {
                        for &a in &next.blocks()[c] {
                            for k in 0..w {
                                row[col(ci, k)] += &(&q[a] * v.values().get(a, k));
                            }
                        }
                    }
                    lp.constrain(row, Relation::Le, Scalar::zero());
                }
                for (ci, &c) in children.iter().enumerate() {
                    let atoms = &next.blocks()[c];
                    if atoms.iter().all(|&a| q[a].is_zero()) {
                        continue;
                    }
                    // Σ q x ≤ Σ_k y_k Σ q v^k
                    let mut row = zeros(nv);
                    let mut rhs = Scalar::zero();
                    for &a in atoms {
                        rhs += &(&q[a] * x.get(a, 0));
                        for k in 0..w {
                            row[col(ci, k)] -= &(&q[a] * v.values().get(a, k));
                        }
                    }
                    lp.constrain(row, Relation::Le, -rhs);
                }
            }
            match lp.solve() {
                LpOutcome::Optimal { value, .. } => Ok(-value),
                LpOutcome::Unbounded => Err(Error::TheoremViolation("ε_t unbounded below".into())),
                LpOutcome::Infeasible => Err(Error::Infeasible("no hedge found for ε_t; cash should always hedge".into())),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = zeros(space.atoms());
    for (block, val) in blocks.iter().zip(values) {
        for &a in block {
            out[a] = val.clone();
        }
    }
    Ok(RandomVec::scalar(out))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyFailure {
    pub t: usize,
    /// A claim in `A_t` outside `K_t·V ⊕ A_{t+1}`.
    pub claim: Vec<Scalar>,
    pub rho: Vec<Scalar>,
    pub epsilon: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyVerdict {
    pub holds: bool,
    pub failure: Option<ConsistencyFailure>,
}

/// Checks `A_t = K_t(V)·V ⊕ A_{t+1}` for `t = T−1, …, 0`.
pub fn is_v_time_consistent(rm: &RiskMeasure, v: &NumeraireVec) -> Result<ConsistencyVerdict> {
    let space = rm.space();
    let value = v.value_map();
    for t in (0..space.horizon()).rev() {
        let at = rm.acceptance_cone(t)?;
        let next = rm.acceptance_cone(t + 1)?;
        let k = k_cone(rm, v, t)?;
        let kv = linear_image(&value, &k)?;
        let sum = minkowski_sum(&[&kv, &next])?;
        let extra = match at.compare(&sum) {
            Comparison::Equal => continue,
            Comparison::LeftNotInRight(sep) => sep.point,
            Comparison::RightNotInLeft(sep) => {
                return Err(Error::TheoremViolation(format!(
                    "K_{t}·V ⊕ A_{} escapes A_{t} at {:?}",
                    t + 1,
                    sep.point.iter().map(|s| s.to_string()).collect::<Vec<_>>()
                )))
            }
        };
        let claim = RandomVec::scalar(extra.clone());
        let rho = rm.rho(t, &claim)?;
        let eps = epsilon(rm, v, t, &claim)?;
        return Ok(ConsistencyVerdict {
            holds: false,
            failure: Some(ConsistencyFailure { t, claim: extra, rho: rho.into_values(), epsilon: eps.into_values() }),
        });
    }
    Ok(ConsistencyVerdict { holds: true, failure: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentabilityVerdict {
    pub holds: bool,
    /// A portfolio in `A_0(V)` outside `⊕_t K_t`.
    pub portfolio: Option<Vec<Scalar>>,
}

pub fn is_predictably_represented(rm: &RiskMeasure, v: &NumeraireVec) -> Result<RepresentabilityVerdict> {
    let space = rm.space();
    let a0v = portfolio_cone(&rm.acceptance_cone(0)?, v)?;
    if space.horizon() == 0 {
        return Ok(RepresentabilityVerdict { holds: true, portfolio: None });
    }
    let ks = (0..space.horizon()).map(|t| k_cone(rm, v, t)).collect::<Result<Vec<_>>>()?;
    let sum = minkowski_sum(&ks.iter().collect::<Vec<_>>())?;
    match a0v.compare(&sum) {
        Comparison::Equal => Ok(RepresentabilityVerdict { holds: true, portfolio: None }),
        Comparison::LeftNotInRight(sep) => Ok(RepresentabilityVerdict { holds: false, portfolio: Some(sep.point) }),
        Comparison::RightNotInLeft(sep) => Err(Error::TheoremViolation(format!(
            "⊕ K_t escapes A_0(V) at {:?}",
            sep.point.iter().map(|s| s.to_string()).collect::<Vec<_>>()
        ))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilitySummary {
    pub stable: bool,
    /// A density in the stable hull outside `A_0(V)*` and the violated row.
    pub hull_point: Option<Vec<Scalar>>,
    pub violated: Option<Vec<Scalar>>,
}

impl From<StabilityVerdict> for StabilitySummary {
    fn from(v: StabilityVerdict) -> Self {
        let (hull_point, violated) = match v.certificate {
            Some(Separation { point, violated }) => (Some(point), Some(violated)),
            None => (None, None),
        };
        StabilitySummary { stable: v.stable, hull_point, violated }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub time_consistent: bool,
    pub representable: bool,
    pub dual_stable: bool,
    pub agreement: bool,
    pub certificates: Certificates,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    pub time_consistency: ConsistencyVerdict,
    pub representability: RepresentabilityVerdict,
    pub stability: StabilitySummary,
    /// Outcome of the pasting search, when it ran within the cap.
    pub pasting_witness: Option<Witness>,
    pub pasting_search: String,
}

/// Runs the three exact checkers and the pasting search.
///
/// Errors with [`Error::TheoremViolation`] if the verdicts disagree, or if
/// a pasting witness exists while the dual cone is declared stable.
pub fn theorem_main_report(rm: &RiskMeasure, v: &NumeraireVec, cap: u64) -> Result<EquivalenceReport> {
    let (tc, (rep, stab)) = rayon::join(
        || is_v_time_consistent(rm, v),
        || rayon::join(|| is_predictably_represented(rm, v), || dual_stability(rm, v)),
    );
    let (tc, rep, stab) = (tc?, rep?, stab?);
    let (witness, search) = match vstability_witness_search(rm, v, cap) {
        Ok(Some(w)) => (Some(w), "witness found".to_string()),
        Ok(None) => (None, "no admissible pasting of members leaves the set".to_string()),
        Err(Error::EnumerationCap { cap, count }) => (None, format!("skipped: {count} combinations exceed cap {cap}")),
        Err(e) => return Err(e),
    };
    let agreement = tc.holds == rep.holds && rep.holds == stab.stable;
    let report = EquivalenceReport {
        time_consistent: tc.holds,
        representable: rep.holds,
        dual_stable: stab.stable,
        agreement,
        certificates: Certificates {
            time_consistency: tc,
            representability: rep,
            stability: stab.into(),
            pasting_witness: witness,
            pasting_search: search,
        },
    };
    if !report.agreement {
        return Err(Error::TheoremViolation(format!(
            "checkers disagree: time-consistent {}, representable {}, dual-stable {}\n{}",
            report.time_consistent,
            report.representable,
            report.dual_stable,
            serde_json::to_string_pretty(&report).unwrap_or_default()
        )));
    }
    if report.dual_stable && report.certificates.pasting_witness.is_some() {
        return Err(Error::TheoremViolation(format!(
            "pasting witness found although the dual cone is stable\n{}",
            serde_json::to_string_pretty(&report).unwrap_or_default()
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub rho0: Vec<Scalar>,
    /// `π_t`, one width-`(d+1)` portfolio per `t < T`, flat layout.
    pub portfolios: Vec<Vec<Scalar>>,
}

/// Splits `X − ρ_0(X)` into one-period acceptable portfolio values.
///
/// An LP over nonnegative weights on the generators of `K_0, …, K_{T−1}`
/// (variable order: `t`, then generator index); the Bland-rule vertex is
/// returned, so the output is deterministic.
pub fn decompose(rm: &RiskMeasure, v: &NumeraireVec, x: &RandomVec) -> Result<Decomposition> {
    check_claim(rm, x)?;
    let space = rm.space();
    let n = space.atoms();
    let w = v.width();
    let rho0 = rm.rho(0, x)?;
    let target: Vector = x.as_slice().iter().zip(rho0.as_slice()).map(|(a, b)| a - b).collect();
    let ks = (0..space.horizon()).map(|t| k_cone(rm, v, t)).collect::<Result<Vec<_>>>()?;
    if space.horizon() == 0 {
        if target.iter().any(Scalar::is_positive) {
            return Err(Error::NotRepresentable("one-date space with a positive residual".into()));
        }
        return Ok(Decomposition { rho0: rho0.into_values(), portfolios: vec![] });
    }
    let value = v.value_map();
    let columns: Vec<(usize, &Vector, Vector)> = ks
        .iter()
        .enumerate()
        .flat_map(|(t, k)| k.gens().iter().map(move |g| (t, g)))
        .map(|(t, g)| (t, g, value.apply(g)))
        .collect();
    let mut lp = LinearProgram::nonneg(columns.len());
    for a in 0..n {
        lp.constrain(columns.iter().map(|(_, _, val)| val[a].clone()).collect(), Relation::Eq, target[a].clone());
    }
    let weights = match lp.solve() {
        LpOutcome::Optimal { point, .. } => point,
        _ => {
            return Err(Error::NotRepresentable(
                "X − ρ_0(X) is not a sum of one-period acceptable portfolio values; run `check` for the certificate".into(),
            ))
        }
    };
    let mut portfolios = vec![zeros(n * w); space.horizon()];
    for ((t, g, _), lam) in columns.iter().zip(&weights) {
        if lam.is_zero() {
            continue;
        }
        for (p, gi) in portfolios[*t].iter_mut().zip(g.iter()) {
            if !gi.is_zero() {
                *p += &(lam * gi);
            }
        }
    }
    let out = Decomposition { rho0: rho0.into_values(), portfolios };
    validate_decomposition(rm, v, x, &out)?;
    Ok(out)
}

/// Independent check: each `π_t ∈ K_t` and `Σ_t π_t·V = X − ρ_0(X)` exactly.
pub fn validate_decomposition(rm: &RiskMeasure, v: &NumeraireVec, x: &RandomVec, d: &Decomposition) -> Result<()> {
    let space = rm.space();
    let n = space.atoms();
    if d.portfolios.len() != space.horizon() {
        return Err(Error::Invalid(format!("expected {} portfolios, got {}", space.horizon(), d.portfolios.len())));
    }
    let rho0 = rm.rho(0, x)?;
    if rho0.as_slice() != &d.rho0[..] {
        return Err(Error::Invalid("reported ρ_0(X) is wrong".into()));
    }
    let mut total = zeros(n);
    for (t, pi) in d.portfolios.iter().enumerate() {
        let k = k_cone(rm, v, t)?;
        if !k.contains(pi) {
            return Err(Error::Invalid(format!("π_{t} is not in K_{t}")));
        }
        let y = RandomVec::new(n, v.width(), pi.clone())?;
        for (acc, val) in total.iter_mut().zip(portfolio_value(&y, v)?.as_slice()) {
            *acc += val;
        }
    }
    for (a, (sum, r)) in total.iter().zip(&d.rho0).enumerate() {
        if sum + r != *x.get(a, 0) {
            return Err(Error::Invalid(format!("Σ π_t·V + ρ_0(X) differs from X on atom {a}")));
        }
    }
    Ok(())
}

/// Returns `K_t` generators for reporting.
pub fn k_generators(rm: &RiskMeasure, v: &NumeraireVec, t: usize) -> Result<Vec<Vector>> {
    Ok(k_cone(rm, v, t)?.gens().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::q;
    use crate::risk::{Polytope, RepresentingSet};
    use crate::space::FilteredSpace;

    fn v(xs: &[&str]) -> Vector {
        xs.iter().map(|x| q(x)).collect()
    }

    fn avar() -> RiskMeasure {
        let space = FilteredSpace::from_blocks(
            v(&["1/100", "9/100", "9/100", "81/100"]),
            &[vec![vec![0, 1, 2, 3]], vec![vec![0, 1], vec![2, 3]], vec![vec![0], vec![1], vec![2], vec![3]]],
        )
        .unwrap();
        let verts = vec![
            v(&["1/2", "1/2", "0", "0"]),
            v(&["1/2", "0", "1/2", "0"]),
            v(&["1/2", "0", "0", "1/2"]),
            v(&["0", "1", "0", "0"]),
            v(&["0", "0", "1", "0"]),
            v(&["0", "0", "0", "1"]),
        ];
        RiskMeasure::new(space, RepresentingSet::Polytope(Polytope::from_vertices(4, verts).unwrap())).unwrap()
    }

    fn paper_v() -> NumeraireVec {
        NumeraireVec::from_columns(&[v(&["1", "1", "1", "1"]), v(&["3", "1", "1", "1"])]).unwrap()
    }

    fn x0() -> RandomVec {
        RandomVec::scalar(v(&["1", "-1", "-1", "-1"]))
    }

    #[test]
    fn epsilon_of_gap_claim() {
        let rm = avar();
        let cash = NumeraireVec::cash(4);
        assert_eq!(rm.rho(0, &x0()).unwrap().as_slice(), &v(&["0", "0", "0", "0"])[..]);
        assert_eq!(epsilon(&rm, &cash, 0, &x0()).unwrap().as_slice(), &v(&["1", "1", "1", "1"])[..]);
        assert_eq!(epsilon(&rm, &paper_v(), 0, &x0()).unwrap().as_slice(), &v(&["0", "0", "0", "0"])[..]);
    }

    #[test]
    fn cash_numeraire_fails_everything() {
        let rm = avar();
        let r = theorem_main_report(&rm, &NumeraireVec::cash(4), 1_000_000).unwrap();
        assert!(!r.time_consistent && !r.representable && !r.dual_stable);
        let f = r.certificates.time_consistency.failure.unwrap();
        assert_eq!(f.t, 0);
        assert!(f.epsilon.iter().zip(&f.rho).any(|(e, r)| e > r));
        assert!(r.certificates.pasting_witness.is_some());
    }

    #[test]
    fn paper_numeraire_passes_everything() {
        let rm = avar();
        let r = theorem_main_report(&rm, &paper_v(), 1_000_000).unwrap();
        assert!(r.time_consistent && r.representable && r.dual_stable && r.agreement);
        assert!(r.certificates.pasting_witness.is_none());
    }

    #[test]
    fn decomposes_gap_claim() {
        let rm = avar();
        let d = decompose(&rm, &paper_v(), &x0()).unwrap();
        assert_eq!(d.portfolios.len(), 2);
        validate_decomposition(&rm, &paper_v(), &x0(), &d).unwrap();
        assert!(matches!(decompose(&rm, &NumeraireVec::cash(4), &x0()), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn validator_rejects_tampering() {
        let rm = avar();
        let mut d = decompose(&rm, &paper_v(), &x0()).unwrap();
        d.portfolios[1][0] += &Scalar::one();
        assert!(validate_decomposition(&rm, &paper_v(), &x0(), &d).is_err());
    }
}
