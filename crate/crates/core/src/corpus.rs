//! Built-in scenarios: the four-atom AVaR example, the Haezendonck ball,
//! a discretized two-period transaction-cost market and seeded random
//! scenarios.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::cone::Vector;
use crate::error::{Error, Result};
use crate::field::{q, Scalar};
use crate::lcg::Lcg;
use crate::market::NumeraireVec;
use crate::risk::{Polytope, QuadBall, RepresentingSet, RiskMeasure};
use crate::scenario::{Expected, Scenario};
use crate::space::FilteredSpace;

fn vec_of(xs: &[&str]) -> Vector {
    xs.iter().map(|x| q(x)).collect()
}

fn binary_tree4(probs: Vector) -> FilteredSpace {
    FilteredSpace::from_blocks(
        probs,
        &[vec![vec![0, 1, 2, 3]], vec![vec![0, 1], vec![2, 3]], vec![vec![0], vec![1], vec![2], vec![3]]],
    )
    .expect("valid tree")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumeraireChoice {
    /// Cash only, `V = 1`.
    Unit,
    /// The example's own numéraire vector.
    Paper,
}

impl std::str::FromStr for NumeraireChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(NumeraireChoice::Unit),
            "paper" => Ok(NumeraireChoice::Paper),
            _ => Err(Error::Parse(format!("numeraire must be \"unit\" or \"paper\", got {s:?}"))),
        }
    }
}

/// The claim `X⁰ = (1, −1, −1, −1)`.
pub fn avar_claim() -> Vector {
    vec_of(&["1", "-1", "-1", "-1"])
}

/// AVaR at level `λ = 1/50` on `P = (1/100, 9/100, 9/100, 81/100)`.
///
/// `𝒬_λ = {Q : dQ/dP ≤ 50}` is the hull of six points.
pub fn build_avar4(choice: NumeraireChoice) -> Scenario {
    let space = binary_tree4(vec_of(&["1/100", "9/100", "9/100", "81/100"]));
    let verts = vec![
        vec_of(&["1/2", "1/2", "0", "0"]),
        vec_of(&["1/2", "0", "1/2", "0"]),
        vec_of(&["1/2", "0", "0", "1/2"]),
        vec_of(&["0", "1", "0", "0"]),
        vec_of(&["0", "0", "1", "0"]),
        vec_of(&["0", "0", "0", "1"]),
    ];
    let set = RepresentingSet::Polytope(Polytope::from_vertices(4, verts).expect("probability vertices"));
    let rm = RiskMeasure::new(space, set).expect("valid AVaR");
    let (name, v, holds) = match choice {
        NumeraireChoice::Unit => ("avar4-unit", NumeraireVec::cash(4), false),
        NumeraireChoice::Paper => (
            "avar4-paper",
            NumeraireVec::from_columns(&[vec_of(&["1", "1", "1", "1"]), vec_of(&["3", "1", "1", "1"])]).expect("positive"),
            true,
        ),
    };
    let mut expected = Expected::triple(holds);
    expected.pasting_witness = Some(!holds);
    Scenario::new(name, rm, v, expected).expect("consistent")
}

/// Uniform measure, `Λ = 2·1_{1,2}` and `M = 2·1_{1,3}` as measures.
pub fn haezendonck_witnesses() -> Vec<Vector> {
    vec![
        vec_of(&["1/4", "1/4", "1/4", "1/4"]),
        vec_of(&["1/2", "1/2", "0", "0"]),
        vec_of(&["1/2", "0", "1/2", "0"]),
    ]
}

/// `V = (1, √2·1_{ω₁} + 1, √2·1_{ω₃} + 1)`.
pub fn haezendonck_numeraires() -> NumeraireVec {
    let one = Scalar::one();
    let lifted = Scalar::sqrt2() + Scalar::one();
    NumeraireVec::from_columns(&[
        vec![one.clone(); 4],
        vec![lifted.clone(), one.clone(), one.clone(), one.clone()],
        vec![one.clone(), one.clone(), lifted, one],
    ])
    .expect("positive")
}

/// The quadratic ball `Σ q² ≤ 1/2` on four uniform atoms, known through
/// membership and three witnesses.
pub fn build_haezendonck4(choice: NumeraireChoice) -> Scenario {
    let space = binary_tree4(vec![Scalar::ratio(1, 4); 4]);
    let set = RepresentingSet::QuadBall(QuadBall { c: Scalar::ratio(1, 2), witnesses: haezendonck_witnesses() });
    let rm = RiskMeasure::new(space, set).expect("valid ball");
    let (name, v, witness) = match choice {
        NumeraireChoice::Unit => ("haezendonck4-unit", NumeraireVec::cash(4), true),
        NumeraireChoice::Paper => ("haezendonck4-paper", haezendonck_numeraires(), false),
    };
    let expected = Expected { pasting_witness: Some(witness), ..Expected::default() };
    Scenario::new(name, rm, v, expected).expect("consistent")
}

/// The polytope spanned by the three Haezendonck witnesses, which the
/// polyhedral checkers can handle.
pub fn build_haezendonck4_hull(choice: NumeraireChoice) -> Scenario {
    let space = binary_tree4(vec![Scalar::ratio(1, 4); 4]);
    let set = RepresentingSet::Polytope(Polytope::from_vertices(4, haezendonck_witnesses()).expect("probability vertices"));
    let rm = RiskMeasure::new(space, set).expect("valid hull");
    let (name, v, expected) = match choice {
        NumeraireChoice::Unit => {
            let mut e = Expected::triple(false);
            e.pasting_witness = Some(true);
            ("haezendonck4-hull-unit", NumeraireVec::cash(4), e)
        }
        NumeraireChoice::Paper => {
            let mut e = Expected::triple(true);
            e.pasting_witness = Some(false);
            ("haezendonck4-hull-paper", haezendonck_numeraires(), e)
        }
    };
    Scenario::new(name, rm, v, expected).expect("consistent")
}

#[derive(Deserialize)]
struct GridFile {
    grids: BTreeMap<String, Grid>,
}

#[derive(Deserialize)]
struct Grid {
    z: Vec<String>,
    exp_z: Vec<String>,
}

fn grids() -> &'static GridFile {
    static GRIDS: OnceLock<GridFile> = OnceLock::new();
    GRIDS.get_or_init(|| serde_json::from_str(include_str!("../data/txcost_grid.json")).expect("bundled grid parses"))
}

/// Grid sizes available for [`build_txcost`].
pub fn txcost_grid_sizes() -> Vec<usize> {
    let mut out: Vec<usize> = grids().grids.keys().filter_map(|k| k.parse().ok()).collect();
    out.sort_unstable();
    out
}

/// Normalized stock factors `e_k = exp(z_k) / mean(exp(z))` for the
/// `n`-point quantile grid truncated at `m`, so that the mean is exactly 1.
pub fn txcost_factors(n: usize, m: &Scalar) -> Result<Vec<Scalar>> {
    let g = grids()
        .grids
        .get(&n.to_string())
        .ok_or_else(|| Error::Unsupported(format!("no bundled grid for n = {n}; available: {:?}", txcost_grid_sizes())))?;
    let mut exps = Vec::with_capacity(n);
    for (z, e) in g.z.iter().zip(&g.exp_z) {
        if &q(z) > m {
            return Err(Error::Unsupported(format!(
                "truncation level {m} lies below the grid point {z}; exp(M) has no bundled value"
            )));
        }
        exps.push(q(e));
    }
    let mean = exps.iter().sum::<Scalar>() / Scalar::from_int(n as i64);
    Ok(exps.iter().map(|e| e / &mean).collect())
}

/// Two i.i.d. truncated Gaussian steps on an `n × n` grid with equal
/// probabilities. Atom `i·n + j` carries `(Ñ₁, Ñ₂) = (z_i, z_j)`, `F_1`
/// reveals `i`, and the stock pays `v₁ = e_i e_j`.
///
/// `𝒬` is cut out by `E_Q[v₁] ∈ [1−λ, 1+λ]` and
/// `E_Q[e_j | F_1] ∈ [1−λ, 1+λ]` on every `F_1` block.
pub fn build_txcost(n: usize, lambda: &Scalar, m: &Scalar) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::Invalid("the grid needs at least two points".into()));
    }
    if !lambda.is_positive() || lambda >= &Scalar::one() {
        return Err(Error::Invalid(format!("λ = {lambda} must lie in (0, 1)")));
    }
    let e = txcost_factors(n, m)?;
    let atoms = n * n;
    let probs = vec![Scalar::ratio(1, atoms as i64); atoms];
    let level1: Vec<Vec<usize>> = (0..n).map(|i| (i * n..(i + 1) * n).collect()).collect();
    let space = FilteredSpace::from_blocks(
        probs,
        &[vec![(0..atoms).collect()], level1, (0..atoms).map(|a| vec![a]).collect()],
    )?;
    let up = Scalar::one() + lambda;
    let down = Scalar::one() - lambda;
    let v1: Vector = (0..atoms).map(|a| &e[a / n] * &e[a % n]).collect();
    let mut rows = Vec::new();
    // (1−λ) Σq ≤ Σ q v₁ ≤ (1+λ) Σq
    rows.push(v1.iter().map(|x| x - &up).collect());
    rows.push(v1.iter().map(|x| &down - x).collect());
    for i in 0..n {
        let mut hi = vec![Scalar::zero(); atoms];
        let mut lo = vec![Scalar::zero(); atoms];
        for j in 0..n {
            hi[i * n + j] = &e[j] - &up;
            lo[i * n + j] = &down - &e[j];
        }
        rows.push(hi);
        rows.push(lo);
    }
    let set = RepresentingSet::Polytope(Polytope::from_rows(atoms, rows)?);
    let rm = RiskMeasure::new(space, set)?;
    let v = NumeraireVec::from_columns(&[vec![Scalar::one(); atoms], v1])?;
    let expected = Expected { dual_stable: Some(true), ..Expected::default() };
    Scenario::new(format!("txcost{n}"), rm, v, expected)
}

/// The stock `v₁` of a transaction-cost scenario as a claim.
pub fn txcost_stock(s: &Scenario) -> Vector {
    s.v.values().column(1)
}

/// A small random scenario, fully determined by `seed` through [`Lcg`].
///
/// Tree: depth `1..=3`; the root splits in two, every later node in one or
/// two, so there are at most eight atoms. Probabilities are integer weights
/// `1..=9`, normalized. `d ∈ 0..=2` numéraires with entries `k/4`,
/// `k ∈ 1..=16`. The polytope has one to five random points with integer
/// weights `0..=4` (redrawn while all zero), plus the midpoint of `P` and a
/// further random point, which is strictly positive.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut g = Lcg::new(seed);
    let depth = g.range(1, 3) as usize;
    // labels[t][atom] over the leaves; grow the tree level by level
    let mut paths: Vec<Vec<usize>> = vec![vec![]];
    for level in 0..depth {
        let mut next = Vec::new();
        for p in &paths {
            let kids = if level == 0 { 2 } else { g.range(1, 2) as usize };
            for c in 0..kids {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        paths = next;
    }
    let atoms = paths.len();
    let filtration: Vec<Vec<Vec<usize>>> = (0..=depth)
        .map(|t| {
            let mut blocks: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
            for (a, p) in paths.iter().enumerate() {
                let key = p[..t].to_vec();
                match blocks.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, b)) => b.push(a),
                    None => blocks.push((key, vec![a])),
                }
            }
            blocks.into_iter().map(|(_, b)| b).collect()
        })
        .collect();
    let weights: Vec<i64> = (0..atoms).map(|_| g.range(1, 9)).collect();
    let total: i64 = weights.iter().sum();
    let probs: Vector = weights.iter().map(|&w| Scalar::ratio(w, total)).collect();
    let space = FilteredSpace::from_blocks(probs.clone(), &filtration).expect("valid random tree");

    let d = g.range(0, 2) as usize;
    let mut columns = vec![vec![Scalar::one(); atoms]];
    for _ in 0..d {
        columns.push((0..atoms).map(|_| Scalar::ratio(g.range(1, 16), 4)).collect());
    }
    let v = NumeraireVec::from_columns(&columns).expect("positive numéraires");

    let random_point = |g: &mut Lcg| -> Vector {
        loop {
            let w: Vec<i64> = (0..atoms).map(|_| g.range(0, 4)).collect();
            let s: i64 = w.iter().sum();
            if s > 0 {
                return w.iter().map(|&x| Scalar::ratio(x, s)).collect();
            }
        }
    };
    let count = g.range(1, 5) as usize;
    let mut verts: Vec<Vector> = (0..count).map(|_| random_point(&mut g)).collect();
    let r = random_point(&mut g);
    let half = Scalar::ratio(1, 2);
    verts.push(probs.iter().zip(&r).map(|(p, x)| &half * &(p + x)).collect());
    let set = RepresentingSet::Polytope(Polytope::from_vertices(atoms, verts).expect("probability vertices"));
    let rm = RiskMeasure::new(space, set).expect("has a strictly positive member");
    Scenario::new(format!("random-{seed}"), rm, v, Expected::default()).expect("consistent")
}

/// Names accepted by [`build`]; `random-<seed>` is also accepted.
pub const NAMES: &[&str] = &[
    "avar4-unit",
    "avar4-paper",
    "haezendonck4-unit",
    "haezendonck4-paper",
    "haezendonck4-hull-unit",
    "haezendonck4-hull-paper",
    "txcost4",
    "txcost8",
    "txcost16",
];

/// Builds a scenario by name. A bare family name (`avar4`, `haezendonck4`,
/// `haezendonck4-hull`) takes its numéraire from `choice`.
pub fn build(name: &str, choice: NumeraireChoice) -> Result<Scenario> {
    let lambda = Scalar::ratio(1, 10);
    let m = Scalar::from_int(3);
    let (family, choice) = match name.rsplit_once('-') {
        Some((f, "unit")) => (f, NumeraireChoice::Unit),
        Some((f, "paper")) => (f, NumeraireChoice::Paper),
        _ => (name, choice),
    };
    match family {
        "avar4" => Ok(build_avar4(choice)),
        "haezendonck4" => Ok(build_haezendonck4(choice)),
        "haezendonck4-hull" => Ok(build_haezendonck4_hull(choice)),
        _ => {
            if let Some(n) = family.strip_prefix("txcost") {
                let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad grid size in {name:?}")))?;
                return build_txcost(n, &lambda, &m);
            }
            if let Some(seed) = family.strip_prefix("random-") {
                let seed: u64 = seed.parse().map_err(|_| Error::Parse(format!("bad seed in {name:?}")))?;
                return Ok(random_scenario(seed));
            }
            Err(Error::Parse(format!("unknown corpus scenario {name:?}; try `corpus list`")))
        }
    }
}
