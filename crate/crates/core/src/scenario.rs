//! Scenarios: a filtered space, a numéraire vector and a representing set,
//! with their JSON form.
//!
//! ```json
//! {"name": "...",
//!  "space": {"atoms": 4, "probs": ["1/4", ...], "filtration": [[[0,1,2,3]], ...]},
//!  "numeraires": [["1", ...], ...],
//!  "representing_set": {"type": "polytope", "vertices": [[...], ...]},
//!  "expected": {"time_consistent": false, ...}}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::market::NumeraireVec;
use crate::risk::{Polytope, QuadBall, RepresentingSet, RiskMeasure};
use crate::space::FilteredSpace;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_consistent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_stable: Option<bool>,
    /// Whether the pasting search over known members finds a witness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pasting_witness: Option<bool>,
}

impl Expected {
    pub fn triple(value: bool) -> Self {
        Expected { time_consistent: Some(value), representable: Some(value), dual_stable: Some(value), pasting_witness: None }
    }

    pub fn is_empty(&self) -> bool {
        *self == Expected::default()
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub rm: RiskMeasure,
    pub v: NumeraireVec,
    pub expected: Expected,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceJson {
    atoms: usize,
    probs: Vec<Scalar>,
    filtration: Vec<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SetJson {
    Polytope {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Vec<Vec<Scalar>>>,
        /// Homogeneous rows `h·q ≤ 0` over probability vectors.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ineqs: Option<Vec<Vec<Scalar>>>,
    },
    QuadBall {
        c: Scalar,
        witnesses: Vec<Vec<Scalar>>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioJson {
    #[serde(default)]
    name: String,
    space: SpaceJson,
    numeraires: Vec<Vec<Scalar>>,
    representing_set: SetJson,
    #[serde(default, skip_serializing_if = "Expected::is_empty")]
    expected: Expected,
}

impl Scenario {
    pub fn new(name: impl Into<String>, rm: RiskMeasure, v: NumeraireVec, expected: Expected) -> Result<Self> {
        if v.atoms() != rm.space().atoms() {
            return Err(Error::DimensionMismatch { expected: rm.space().atoms(), found: v.atoms() });
        }
        Ok(Scenario { name: name.into(), rm, v, expected })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScenarioJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = raw.space.atoms;
        if raw.space.probs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: raw.space.probs.len() });
        }
        let space = FilteredSpace::from_blocks(raw.space.probs, &raw.space.filtration)?;
        let set = match raw.representing_set {
            SetJson::Polytope { vertices: Some(vs), ineqs: None } => RepresentingSet::Polytope(Polytope::from_vertices(n, vs)?),
            SetJson::Polytope { vertices: None, ineqs: Some(rows) } => {
                if let Some(r) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, found: r.len() });
                }
                RepresentingSet::Polytope(Polytope::from_rows(n, rows)?)
            }
            SetJson::Polytope { .. } => {
                return Err(Error::Parse("a polytope needs exactly one of \"vertices\" or \"ineqs\"".into()))
            }
            SetJson::QuadBall { c, witnesses } => RepresentingSet::QuadBall(QuadBall { c, witnesses }),
        };
        let rm = RiskMeasure::new(space, set)?;
        if let Some(col) = raw.numeraires.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: col.len() });
        }
        let v = NumeraireVec::from_columns(&raw.numeraires)?;
        Scenario::new(raw.name, rm, v, raw.expected)
    }

    pub fn to_json(&self) -> String {
        let space = self.rm.space();
        let filtration = space.partitions().iter().map(|p| p.blocks().to_vec()).collect();
        let set = match self.rm.set() {
            RepresentingSet::Polytope(p) => match p.rows() {
                Some(rows) => SetJson::Polytope { vertices: None, ineqs: Some(rows.to_vec()) },
                None => SetJson::Polytope { vertices: Some(p.vertices().to_vec()), ineqs: None },
            },
            RepresentingSet::QuadBall(b) => SetJson::QuadBall { c: b.c.clone(), witnesses: b.witnesses.clone() },
        };
        let raw = ScenarioJson {
            name: self.name.clone(),
            space: SpaceJson { atoms: space.atoms(), probs: space.probs().to_vec(), filtration },
            numeraires: (0..self.v.width()).map(|k| self.v.values().column(k)).collect(),
            representing_set: set,
            expected: self.expected.clone(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("scenario serializes");
        s.push('\n');
        s
    }
}
