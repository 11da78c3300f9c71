//! Predictable pre-images, the stable hull, pasting and witness searches.
//!
//! For a dual cone `D` of width-`(d+1)` densities,
//! `M_t(D) = {Z : E[Z|F_{t+1}] = α E[Z'|F_{t+1}], α ≥ 0 F_t-measurable, Z' ∈ D}`.
//! Its convex hull is computed as the pre-image under `E[·|F_{t+1}]` of the
//! `F_t`-cone of `E[D|F_{t+1}]`, whose generators are `1_B ⊙ E[g|F_{t+1}]`.
//! On a finite space `α` may as well be bounded, so this is exact.

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{dd_rays, dual_cone, intersect, Comparison, linear_preimage, zeros, LinearMap, PolyCone, Separation, Vector};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::market::{k_cone, lifted_dual, NumeraireVec};
use crate::risk::RiskMeasure;
use crate::space::{FilteredSpace, Measure, RandomVec, StoppingTime};

/// `E_P[·|F_t]` acting componentwise on width-`w` coordinates.
pub fn cond_expect_map(space: &FilteredSpace, t: usize, width: usize) -> LinearMap {
    let n = space.atoms();
    let dim = n * width;
    let mut rows = vec![zeros(dim); dim];
    for block in space.partition(t).blocks() {
        let mass: Scalar = block.iter().map(|&a| &space.probs()[a]).sum();
        for &a in block {
            for &b in block {
                let w = &space.probs()[b] / &mass;
                for k in 0..width {
                    rows[a * width + k][b * width + k] = w.clone();
                }
            }
        }
    }
    LinearMap::new(rows, dim).expect("square map")
}

/// The `F_t`-cone of a generator list, with its inequality description
/// assembled block by block: the cone splits as a direct sum over the
/// coordinate groups of the `F_t` blocks, so each summand is converted in
/// its own small coordinate space.
pub fn ft_cone(space: &FilteredSpace, t: usize, width: usize, gens: &[Vector]) -> Result<PolyCone> {
    let dim = space.atoms() * width;
    let mut all_gens = Vec::new();
    let mut all_rows = Vec::new();
    for block in space.partition(t).blocks() {
        let coords: Vec<usize> = block.iter().flat_map(|&a| (0..width).map(move |k| a * width + k)).collect();
        let local: Vec<Vector> = gens.iter().map(|g| coords.iter().map(|&c| g[c].clone()).collect()).collect();
        for (g, l) in gens.iter().zip(&local) {
            if l.iter().all(Scalar::is_zero) {
                continue;
            }
            let mut e = zeros(dim);
            for &c in &coords {
                e[c] = g[c].clone();
            }
            all_gens.push(e);
        }
        for h in dd_rays(coords.len(), &local).generators() {
            let mut e = zeros(dim);
            for (i, &c) in coords.iter().enumerate() {
                e[c] = h[i].clone();
            }
            all_rows.push(e);
        }
    }
    PolyCone::from_both(dim, all_gens, all_rows)
}

pub fn predictable_preimage(space: &FilteredSpace, d: &PolyCone, width: usize, t: usize) -> Result<PolyCone> {
    if t >= space.horizon() {
        return Err(Error::Invalid(format!("predictable pre-image needs t < T = {}", space.horizon())));
    }
    if d.dim() != space.atoms() * width {
        return Err(Error::DimensionMismatch { expected: space.atoms() * width, found: d.dim() });
    }
    let e = cond_expect_map(space, t + 1, width);
    let image: Vec<Vector> = d.gens().iter().map(|g| e.apply(g)).collect();
    let cone = ft_cone(space, t, width, &image)?;
    linear_preimage(&e, &cone)
}

/// `[D] = ∩_t conv M_t(D)`.
pub fn stable_hull(space: &FilteredSpace, d: &PolyCone, width: usize) -> Result<PolyCone> {
    if space.horizon() == 0 {
        return Ok(d.clone());
    }
    let parts = (0..space.horizon())
        .into_par_iter()
        .map(|t| predictable_preimage(space, d, width, t))
        .collect::<Result<Vec<_>>>()?;
    intersect(&parts.iter().collect::<Vec<_>>())
}

#[derive(Clone, Debug)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// On failure: a point of `[D]` outside `D` and the violated row of `D`.
    pub certificate: Option<Separation>,
}

/// Decides `D = [D]`. `D ⊆ [D]` always holds, so only `[D] ⊆ D` is checked.
pub fn is_predictably_stable(space: &FilteredSpace, d: &PolyCone, width: usize) -> Result<StabilityVerdict> {
    let hull = stable_hull(space, d, width)?;
    Ok(match d.includes(&hull) {
        Ok(()) => StabilityVerdict { stable: true, certificate: None },
        Err(sep) => StabilityVerdict { stable: false, certificate: Some(sep) },
    })
}

/// The density of `Q ⊕_τ Q'`: `(Z_τ / W_τ) W`, zero where `Z_τ = 0`.
/// On `{τ = T}` the density is `Z` itself, even where `W` vanishes.
pub fn paste(space: &FilteredSpace, q: &Measure, q_prime: &Measure, tau: &StoppingTime) -> Result<Measure> {
    let n = space.atoms();
    q.check_probability(n)?;
    q_prime.check_probability(n)?;
    let z = RandomVec::scalar(q.density(space));
    let w = RandomVec::scalar(q_prime.density(space));
    let zt = space.cond_expect_stopped(&z, tau, None)?;
    let wt = space.cond_expect_stopped(&w, tau, None)?;
    let mut density = Vec::with_capacity(n);
    for a in 0..n {
        let za = zt.value.get(a, 0);
        let wa = wt.value.get(a, 0);
        if tau.tau[a] == space.horizon() {
            density.push(z.get(a, 0).clone());
        } else if za.is_zero() {
            density.push(Scalar::zero());
        } else if wa.is_zero() {
            return Err(Error::UndefinedPasting { atom: a });
        } else {
            density.push(za / wa * w.get(a, 0));
        }
    }
    Ok(Measure::from_density(space, &density))
}

/// Global indices of the blocks of `F_τ`: for each `t`, the `F_t` blocks on
/// which `τ = t`, numbered consecutively across `t`.
fn stopped_blocks(space: &FilteredSpace, tau: &StoppingTime) -> Vec<usize> {
    let mut out = Vec::new();
    let mut offset = 0;
    for t in 0..=space.horizon() {
        let blocks = space.partition(t).blocks();
        out.extend(blocks.iter().enumerate().filter(|(_, b)| tau.tau[b[0]] == t).map(|(i, _)| offset + i));
        offset += blocks.len();
    }
    out
}

/// Per block of every `F_t` (global numbering): `None` when `q` does not
/// charge it, else the conditional expectations of `v¹, …, vᵈ` under `q`.
fn block_profile(space: &FilteredSpace, v: &NumeraireVec, q: &[Scalar]) -> Vec<Option<Vec<Scalar>>> {
    let w = v.width();
    space
        .partitions()
        .iter()
        .flat_map(|p| p.blocks())
        .map(|block| {
            let mass: Scalar = block.iter().map(|&a| &q[a]).sum();
            (!mass.is_zero()).then(|| {
                (1..w).map(|k| block.iter().map(|&a| &q[a] * v.values().get(a, k)).sum::<Scalar>() / &mass).collect()
            })
        })
        .collect()
}

fn block_compatible(q: &Option<Vec<Scalar>>, q_prime: &Option<Vec<Scalar>>) -> bool {
    match (q, q_prime) {
        (_, None) => q.is_none(),
        (None, Some(_)) => true,
        (Some(a), Some(b)) => a == b,
    }
}

/// Whether `(Q, Q', τ)` may be pasted under numéraires `V`.
///
/// Per block `C` of `F_τ`: if `Q'` charges `C`, either `Q` does not (the
/// pasting vanishes there) or the two conditional `V`-expectations agree;
/// if `Q'` does not charge `C`, neither may `Q`. Blocks charged by neither
/// impose nothing.
pub fn admissible(space: &FilteredSpace, v: &NumeraireVec, q: &[Scalar], q_prime: &[Scalar], tau: &StoppingTime) -> bool {
    let (pq, pp) = (block_profile(space, v, q), block_profile(space, v, q_prime));
    stopped_blocks(space, tau).into_iter().all(|b| block_compatible(&pq[b], &pp[b]))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Indices into the member list (vertices or ball witnesses).
    pub first: usize,
    pub second: usize,
    pub tau: Vec<usize>,
    #[serde(rename = "Q")]
    pub q: Vec<Scalar>,
    #[serde(rename = "Qprime")]
    pub q_prime: Vec<Scalar>,
    pub pasted: Vec<Scalar>,
    pub violated: String,
}

/// Searches member pairs and stopping times, in lexicographic order of
/// `(first, second, τ)`, for an admissible pasting that leaves the set.
///
/// A hit refutes predictable `V`-m-stability; a miss proves nothing by
/// itself, since only extreme members are pasted.
pub fn vstability_witness_search(rm: &RiskMeasure, v: &NumeraireVec, cap: u64) -> Result<Option<Witness>> {
    let space = rm.space();
    let members = rm.set().members();
    let times = space.enumerate_stopping_times(cap)?;
    let k = members.len();
    let total = (k as u64).saturating_mul(k as u64).saturating_mul(times.len() as u64);
    if total > cap.saturating_mul(16) {
        return Err(Error::EnumerationCap { cap: cap.saturating_mul(16), count: total });
    }
    if let Ok(p) = rm.polytope() {
        // membership tests below then use the inequality list, not an LP
        p.measure_cone().ineqs();
    }
    let profiles: Vec<_> = members.par_iter().map(|q| block_profile(space, v, q)).collect();
    let stopped: Vec<Vec<usize>> = times.iter().map(|tau| stopped_blocks(space, tau)).collect();
    let all_blocks: Vec<(usize, &Vec<usize>)> =
        (0..=space.horizon()).flat_map(|t| space.partition(t).blocks().iter().map(move |b| (t, b))).collect();
    let masses: Vec<Vec<Scalar>> = members
        .par_iter()
        .map(|q| all_blocks.iter().map(|(_, b)| b.iter().map(|&a| &q[a]).sum()).collect())
        .collect();
    let horizon = space.horizon();
    let hit = (0..k * k).into_par_iter().filter(|&pair| pair / k != pair % k).find_map_first(|pair| {
        let (i, j) = (pair / k, pair % k);
        let (q, q_prime) = (&members[i], &members[j]);
        let compatible: Vec<bool> =
            profiles[i].iter().zip(&profiles[j]).map(|(a, b)| block_compatible(a, b)).collect();
        stopped.iter().zip(&times).find_map(|(blocks, tau)| {
            if !blocks.iter().all(|&b| compatible[b]) {
                return None;
            }
            // Q on {τ = T}; elsewhere Q(C)·Q'(·|C) on each stopped block C
            let mut pasted = zeros(q.len());
            for &b in blocks {
                let (t, block) = all_blocks[b];
                let mq = &masses[i][b];
                if t == horizon {
                    for &a in block {
                        pasted[a] = q[a].clone();
                    }
                } else if !mq.is_zero() {
                    let factor = mq / &masses[j][b];
                    for &a in block {
                        pasted[a] = &factor * &q_prime[a];
                    }
                }
            }
            if &pasted == q || &pasted == q_prime {
                return None;
            }
            let reason = rm.set().explain_exclusion(&pasted)?;
            Some(Witness {
                first: i,
                second: j,
                tau: tau.tau.clone(),
                q: q.clone(),
                q_prime: q_prime.clone(),
                pasted,
                violated: reason,
            })
        })
    });
    Ok(hit)
}

/// `A_0(V)*` stability verdict for a polytope risk measure.
pub fn dual_stability(rm: &RiskMeasure, v: &NumeraireVec) -> Result<StabilityVerdict> {
    let d = lifted_dual(rm, v)?;
    is_predictably_stable(rm.space(), &d, v.width())
}

/// Compares `K_t(A, V)` with `(conv M_t(A_0(V)*))*`; returns the
/// separation when they differ.
pub fn crucial_claim_check(rm: &RiskMeasure, v: &NumeraireVec, t: usize) -> Result<(bool, Option<Separation>)> {
    let space = rm.space();
    let d = lifted_dual(rm, v)?;
    let mt = predictable_preimage(space, &d, v.width(), t)?;
    let polar = dual_cone(&mt, &space.weights(v.width()))?;
    let k = k_cone(rm, v, t)?;
    Ok(match k.compare(&polar) {
        Comparison::Equal => (true, None),
        Comparison::LeftNotInRight(s) | Comparison::RightNotInLeft(s) => (false, Some(s)),
    })
}
