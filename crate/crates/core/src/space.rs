//! Finite filtered probability spaces.
//!
//! Atoms are indexed `0..n`. A filtration is a chain of partitions
//! `F_0, …, F_T`, each refining the previous one, with `F_T` discrete.
//! Random vectors are stored row-major: entry `(ω, k)` lives at
//! `ω * width + k`, which is also the coordinate layout used by cones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from per-atom labels; block ids are canonicalized
    /// by order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(labels.len());
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (atom, label) in labels.iter().enumerate() {
            let next = remap.len();
            let id = *remap.entry(*label).or_insert(next);
            if id == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[id].push(atom);
            block_of.push(id);
        }
        Partition { block_of, blocks }
    }

    pub fn from_blocks(atoms: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; atoms];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Invalid("empty block in partition".into()));
            }
            for &atom in block {
                if atom >= atoms {
                    return Err(Error::Invalid(format!("atom {atom} out of range 0..{atoms}")));
                }
                if labels[atom] != usize::MAX {
                    return Err(Error::Invalid(format!("atom {atom} appears in two blocks")));
                }
                labels[atom] = b;
            }
        }
        if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Invalid(format!("atom {missing} is not covered by the partition")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn trivial(atoms: usize) -> Self {
        Self::from_labels(&vec![0; atoms])
    }

    pub fn discrete(atoms: usize) -> Self {
        Self::from_labels(&(0..atoms).collect::<Vec<_>>())
    }

    pub fn atoms(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True if every block of `self` sits inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|block| {
            let b = coarser.block_of(block[0]);
            block.iter().all(|&a| coarser.block_of(a) == b)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomVec {
    width: usize,
    values: Vec<Scalar>,
}

impl RandomVec {
    pub fn new(atoms: usize, width: usize, values: Vec<Scalar>) -> Result<Self> {
        if width == 0 {
            return Err(Error::Invalid("random vector of width 0".into()));
        }
        if values.len() != atoms * width {
            return Err(Error::DimensionMismatch { expected: atoms * width, found: values.len() });
        }
        Ok(RandomVec { width, values })
    }

    /// A scalar random variable (`width = 1`).
    pub fn scalar(values: Vec<Scalar>) -> Self {
        RandomVec { width: 1, values }
    }

    pub fn zeros(atoms: usize, width: usize) -> Self {
        RandomVec { width, values: vec![Scalar::zero(); atoms * width] }
    }

    /// Builds from columns `v^0, …, v^d`, each of length `atoms`.
    pub fn from_columns(columns: &[Vec<Scalar>]) -> Result<Self> {
        let width = columns.len();
        if width == 0 {
            return Err(Error::Invalid("no columns".into()));
        }
        let atoms = columns[0].len();
        if columns.iter().any(|c| c.len() != atoms) {
            return Err(Error::Invalid("columns of unequal length".into()));
        }
        let mut values = Vec::with_capacity(atoms * width);
        for w in 0..atoms {
            for c in columns {
                values.push(c[w].clone());
            }
        }
        Ok(RandomVec { width, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn atoms(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn get(&self, atom: usize, k: usize) -> &Scalar {
        &self.values[atom * self.width + k]
    }

    pub fn row(&self, atom: usize) -> &[Scalar] {
        &self.values[atom * self.width..(atom + 1) * self.width]
    }

    pub fn column(&self, k: usize) -> Vec<Scalar> {
        (0..self.atoms()).map(|w| self.get(w, k).clone()).collect()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Scalar> {
        self.values
    }
}

/// Conditional expectation result: blocks where the conditioning measure has
/// no mass are masked out instead of receiving a fabricated value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conditional {
    pub value: RandomVec,
    /// `defined[ω]` is false on atoms whose conditioning block has zero mass.
    pub defined: Vec<bool>,
}

impl Conditional {
    pub fn get(&self, atom: usize, k: usize) -> Option<&Scalar> {
        self.defined[atom].then(|| self.value.get(atom, k))
    }

    pub fn is_total(&self) -> bool {
        self.defined.iter().all(|&d| d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Measure {
    pub weights: Vec<Scalar>,
}

impl Measure {
    pub fn new(weights: Vec<Scalar>) -> Self {
        Measure { weights }
    }

    pub fn total(&self) -> Scalar {
        self.weights.iter().sum()
    }

    pub fn mass_of(&self, atoms: &[usize]) -> Scalar {
        atoms.iter().map(|&a| &self.weights[a]).sum()
    }

    pub fn check_probability(&self, atoms: usize) -> Result<()> {
        if self.weights.len() != atoms {
            return Err(Error::DimensionMismatch { expected: atoms, found: self.weights.len() });
        }
        if self.weights.iter().any(Scalar::is_negative) {
            return Err(Error::Invalid("measure has a negative weight".into()));
        }
        if !self.total().is_one() {
            return Err(Error::Invalid(format!("measure has total mass {}", self.total())));
        }
        Ok(())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(Scalar::is_positive)
    }

    /// Radon–Nikodym derivative with respect to the reference measure.
    pub fn density(&self, space: &FilteredSpace) -> Vec<Scalar> {
        self.weights.iter().zip(space.probs()).map(|(q, p)| q / p).collect()
    }

    pub fn from_density(space: &FilteredSpace, density: &[Scalar]) -> Self {
        Measure { weights: density.iter().zip(space.probs()).map(|(z, p)| z * p).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StoppingTime {
    pub tau: Vec<usize>,
}

impl StoppingTime {
    pub fn constant(atoms: usize, t: usize) -> Self {
        StoppingTime { tau: vec![t; atoms] }
    }

    pub fn check_adapted(&self, space: &FilteredSpace) -> Result<()> {
        if self.tau.len() != space.atoms() {
            return Err(Error::DimensionMismatch { expected: space.atoms(), found: self.tau.len() });
        }
        if let Some(&t) = self.tau.iter().find(|&&t| t > space.horizon()) {
            return Err(Error::Invalid(format!("stopping value {t} beyond horizon {}", space.horizon())));
        }
        for t in 0..=space.horizon() {
            for block in space.partition(t).blocks() {
                let stopped = block.iter().filter(|&&a| self.tau[a] <= t).count();
                if stopped != 0 && stopped != block.len() {
                    return Err(Error::Invalid(format!(
                        "{{tau <= {t}}} splits the F_{t} block {block:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FilteredSpace {
    probs: Vec<Scalar>,
    partitions: Vec<Partition>,
}

impl FilteredSpace {
    pub fn new(probs: Vec<Scalar>, partitions: Vec<Partition>) -> Result<Self> {
        let n = probs.len();
        if n == 0 {
            return Err(Error::Invalid("space without atoms".into()));
        }
        if probs.iter().any(|p| !p.is_positive()) {
            return Err(Error::Invalid("every atom must carry positive probability".into()));
        }
        let total: Scalar = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("probabilities sum to {total}, not 1")));
        }
        if partitions.is_empty() {
            return Err(Error::Invalid("empty filtration".into()));
        }
        if partitions.iter().any(|p| p.atoms() != n) {
            return Err(Error::Invalid("partition over the wrong number of atoms".into()));
        }
        for (t, pair) in partitions.windows(2).enumerate() {
            if !pair[1].refines(&pair[0]) {
                return Err(Error::Invalid(format!("F_{} does not refine F_{t}", t + 1)));
            }
        }
        if partitions.last().unwrap().len() != n {
            return Err(Error::Invalid("the terminal partition must be discrete".into()));
        }
        Ok(FilteredSpace { probs, partitions })
    }

    /// Convenience constructor from block lists; `F_T` must be listed too.
    pub fn from_blocks(probs: Vec<Scalar>, filtration: &[Vec<Vec<usize>>]) -> Result<Self> {
        let n = probs.len();
        let partitions =
            filtration.iter().map(|b| Partition::from_blocks(n, b)).collect::<Result<Vec<_>>>()?;
        Self::new(probs, partitions)
    }

    pub fn atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn horizon(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn probs(&self) -> &[Scalar] {
        &self.probs
    }

    pub fn partition(&self, t: usize) -> &Partition {
        &self.partitions[t]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn reference(&self) -> Measure {
        Measure::new(self.probs.clone())
    }

    /// Pairing weights for a width-`w` coordinate space: `p_ω` repeated `w` times.
    pub fn weights(&self, width: usize) -> Vec<Scalar> {
        self.probs.iter().flat_map(|p| std::iter::repeat_n(p.clone(), width)).collect()
    }

    fn check_time(&self, t: usize) -> Result<()> {
        if t > self.horizon() {
            return Err(Error::Invalid(format!("time {t} beyond horizon {}", self.horizon())));
        }
        Ok(())
    }

    /// Blockwise weighted average over the blocks of `F_t`.
    pub fn cond_expect(&self, x: &RandomVec, t: usize, under: Option<&Measure>) -> Result<Conditional> {
        self.check_time(t)?;
        let n = self.atoms();
        if x.atoms() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.atoms() });
        }
        let weights = under.map_or(&self.probs[..], |m| &m.weights[..]);
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
        }
        let w = x.width();
        let mut values = vec![Scalar::zero(); n * w];
        let mut defined = vec![false; n];
        for block in self.partitions[t].blocks() {
            let mass: Scalar = block.iter().map(|&a| &weights[a]).sum();
            if mass.is_zero() {
                continue;
            }
            for k in 0..w {
                let num: Scalar = block.iter().map(|&a| &weights[a] * x.get(a, k)).sum();
                let avg = &num / &mass;
                for &a in block {
                    values[a * w + k] = avg.clone();
                }
            }
            for &a in block {
                defined[a] = true;
            }
        }
        Ok(Conditional { value: RandomVec { width: w, values }, defined })
    }

    /// `E[X | F_τ]`: on `{τ = t}` it agrees with `E[X | F_t]`.
    pub fn cond_expect_stopped(
        &self,
        x: &RandomVec,
        tau: &StoppingTime,
        under: Option<&Measure>,
    ) -> Result<Conditional> {
        tau.check_adapted(self)?;
        let n = self.atoms();
        let w = x.width();
        let mut values = vec![Scalar::zero(); n * w];
        let mut defined = vec![false; n];
        let mut times: Vec<usize> = tau.tau.clone();
        times.sort_unstable();
        times.dedup();
        for t in times {
            let c = self.cond_expect(x, t, under)?;
            for a in (0..n).filter(|&a| tau.tau[a] == t) {
                defined[a] = c.defined[a];
                for k in 0..w {
                    values[a * w + k] = c.value.get(a, k).clone();
                }
            }
        }
        Ok(Conditional { value: RandomVec { width: w, values }, defined })
    }

    pub fn is_measurable(&self, x: &RandomVec, t: usize) -> bool {
        self.partitions[t]
            .blocks()
            .iter()
            .all(|block| block.iter().all(|&a| x.row(a) == x.row(block[0])))
    }

    fn children(&self, t: usize, block: usize) -> Vec<usize> {
        let atoms = &self.partitions[t].blocks()[block];
        let next = &self.partitions[t + 1];
        let mut out: Vec<usize> = atoms.iter().map(|&a| next.block_of(a)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn count_from(&self, t: usize, block: usize) -> u64 {
        if t == self.horizon() {
            return 1;
        }
        let inner = self
            .children(t, block)
            .into_iter()
            .fold(1u64, |acc, c| acc.saturating_mul(self.count_from(t + 1, c)));
        inner.saturating_add(1)
    }

    /// Number of adapted stopping times (saturating).
    pub fn stopping_time_count(&self) -> u64 {
        (0..self.partitions[0].len()).fold(1u64, |acc, b| acc.saturating_mul(self.count_from(0, b)))
    }

    fn assignments_from(&self, t: usize, block: usize) -> Vec<Vec<(usize, usize)>> {
        let atoms = &self.partitions[t].blocks()[block];
        let mut out = vec![atoms.iter().map(|&a| (a, t)).collect::<Vec<_>>()];
        if t < self.horizon() {
            let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
            for c in self.children(t, block) {
                let sub = self.assignments_from(t + 1, c);
                combos = combos
                    .iter()
                    .flat_map(|prefix| {
                        sub.iter().map(move |s| {
                            let mut v = prefix.clone();
                            v.extend_from_slice(s);
                            v
                        })
                    })
                    .collect();
            }
            out.extend(combos);
        }
        out
    }

    /// All adapted stopping times, in lexicographic order of the `τ` vector.
    pub fn enumerate_stopping_times(&self, cap: u64) -> Result<Vec<StoppingTime>> {
        let count = self.stopping_time_count();
        if count > cap {
            return Err(Error::EnumerationCap { cap, count });
        }
        let n = self.atoms();
        let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for b in 0..self.partitions[0].len() {
            let sub = self.assignments_from(0, b);
            combos = combos
                .iter()
                .flat_map(|prefix| {
                    sub.iter().map(move |s| {
                        let mut v = prefix.clone();
                        v.extend_from_slice(s);
                        v
                    })
                })
                .collect();
        }
        let mut out: Vec<StoppingTime> = combos
            .into_iter()
            .map(|assign| {
                let mut tau = vec![0; n];
                for (a, t) in assign {
                    tau[a] = t;
                }
                StoppingTime { tau }
            })
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Default stopping-time enumeration cap; overridable through `CONERISK_CAP`.
pub const DEFAULT_CAP: u64 = 1_000_000;

pub fn cap_from_env() -> u64 {
    std::env::var("CONERISK_CAP").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_CAP)
}
