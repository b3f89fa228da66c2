//! Finitely supported joint laws and the partition calculus of generated
//! σ-algebras.
//!
//! For a law with finitely many atoms, the σ-algebra generated by `X_A` is the
//! partition of the atoms by the value of their `A`-coordinates. Intersections
//! of σ-algebras become the finest common coarsening of two partitions, which
//! is computed as connected components with a union-find.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_subsets, SubsetMask, MAX_INPUTS};

/// Absolute tolerance on the total probability mass.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Above this many inputs, non-exhaustive Assumption-1 checks fall back to a
/// deterministic sample of subset pairs.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub name: String,
    pub levels: Vec<String>,
}

impl InputSpec {
    pub fn new<S: Into<String>>(name: S, levels: &[&str]) -> Self {
        InputSpec {
            name: name.into(),
            levels: levels.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Joint probability table over the full product grid, stored densely in
/// row-major order (last input varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    pub inputs: Vec<InputSpec>,
    pub weights: Vec<f64>,
}

impl JointPmf {
    pub fn new(inputs: Vec<InputSpec>, weights: Vec<f64>) -> Self {
        JointPmf { inputs, weights }
    }

    pub fn d(&self) -> usize {
        self.inputs.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.inputs.iter().map(|i| i.levels.len()).collect()
    }

    pub fn grid_size(&self) -> usize {
        grid_size(&self.shape())
    }

    /// Univariate marginal probabilities, one vector per input.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        let shape = self.shape();
        let mut out: Vec<Vec<f64>> = shape.iter().map(|&m| vec![0.0; m]).collect();
        for (cell, &w) in self.weights.iter().enumerate() {
            for (i, level) in cell_coords(&shape, cell).into_iter().enumerate() {
                out[i][level] += w;
            }
        }
        out
    }

    /// The product law with the same univariate marginals.
    pub fn independent_copy(&self) -> JointPmf {
        let shape = self.shape();
        let marginals = self.marginals();
        let weights = (0..grid_size(&shape))
            .map(|cell| {
                cell_coords(&shape, cell)
                    .into_iter()
                    .enumerate()
                    .map(|(i, level)| marginals[i][level])
                    .product()
            })
            .collect();
        JointPmf {
            inputs: self.inputs.clone(),
            weights,
        }
    }
}

pub fn grid_size(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Row-major coordinates of a flat grid index.
pub fn cell_coords(shape: &[usize], mut cell: usize) -> Vec<usize> {
    let mut coords = vec![0; shape.len()];
    for i in (0..shape.len()).rev() {
        coords[i] = cell % shape[i];
        cell /= shape[i];
    }
    coords
}

/// Flat row-major index of a coordinate tuple; `None` when out of range.
pub fn cell_index(shape: &[usize], coords: &[usize]) -> Option<usize> {
    if coords.len() != shape.len() {
        return None;
    }
    let mut idx = 0;
    for (&c, &m) in coords.iter().zip(shape) {
        if c >= m {
            return None;
        }
        idx = idx * m + c;
    }
    Some(idx)
}

/// The atoms of σ_X: grid cells carrying positive mass, in row-major order.
#[derive(Debug, Clone)]
pub struct SupportAtoms {
    inputs: Vec<InputSpec>,
    shape: Vec<usize>,
    cells: Vec<usize>,
    coords: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl SupportAtoms {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn d(&self) -> usize {
        self.shape.len()
    }

    pub fn inputs(&self) -> &[InputSpec] {
        &self.inputs
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Probability of each atom.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat grid index of each atom.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn coords(&self, atom: usize) -> &[usize] {
        &self.coords[atom]
    }

    pub fn atom_of(&self, coords: &[usize]) -> Option<usize> {
        let cell = cell_index(&self.shape, coords)?;
        self.cells.binary_search(&cell).ok()
    }

    /// Restricts a full-grid model table to the support atoms.
    pub fn restrict(&self, model: &[f64]) -> Result<Vec<f64>> {
        let size = grid_size(&self.shape);
        if model.len() != size {
            return Err(Error::LengthMismatch {
                expected: size,
                found: model.len(),
            });
        }
        Ok(self.cells.iter().map(|&c| model[c]).collect())
    }

    /// Dense joint table with zeros off the support.
    pub fn to_pmf(&self) -> JointPmf {
        let mut weights = vec![0.0; grid_size(&self.shape)];
        for (&c, &w) in self.cells.iter().zip(&self.weights) {
            weights[c] = w;
        }
        JointPmf::new(self.inputs.clone(), weights)
    }

    /// Largest absolute gap between the joint table and the product of its
    /// marginals, over the full grid.
    pub fn product_form_deviation(&self) -> f64 {
        let pmf = self.to_pmf();
        let tilde = pmf.independent_copy();
        pmf.weights
            .iter()
            .zip(&tilde.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Checks a raw table and extracts its support atoms. Weights are rescaled by
/// their sum so the atom masses add up to one to machine precision.
pub fn validate_pmf(raw: &JointPmf) -> Result<SupportAtoms> {
    let d = raw.d();
    if d == 0 || d > MAX_INPUTS {
        return Err(Error::InputCountOutOfRange(d));
    }
    for input in &raw.inputs {
        if input.levels.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "input `{}` needs at least two levels",
                input.name
            )));
        }
        let distinct: BTreeSet<&String> = input.levels.iter().collect();
        if distinct.len() != input.levels.len() {
            return Err(Error::InvalidInput(format!(
                "input `{}` has duplicate level labels",
                input.name
            )));
        }
    }
    let shape = raw.shape();
    let size = grid_size(&shape);
    if raw.weights.len() != size {
        return Err(Error::LengthMismatch {
            expected: size,
            found: raw.weights.len(),
        });
    }
    for (cell, &w) in raw.weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite weight at grid cell {cell}")));
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { cell, weight: w });
        }
    }
    let sum: f64 = raw.weights.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::SumNotOne { sum });
    }
    for (input, marginal) in raw.inputs.iter().zip(raw.marginals()) {
        if marginal.iter().filter(|&&m| m > 0.0).count() < 2 {
            return Err(Error::DegenerateMarginal {
                name: input.name.clone(),
            });
        }
    }

    let mut cells = Vec::new();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (cell, &w) in raw.weights.iter().enumerate() {
        if w > 0.0 {
            cells.push(cell);
            coords.push(cell_coords(&shape, cell));
            weights.push(w / sum);
        }
    }
    Ok(SupportAtoms {
        inputs: raw.inputs.clone(),
        shape,
        cells,
        coords,
        weights,
    })
}

/// Partition of the atoms realizing a σ-algebra.
///
/// Blocks are stored canonically: each block sorted ascending, blocks ordered
/// by their smallest atom. Two partitions are equal iff their block lists are.
#[derive(Debug, Clone)]
pub struct AtomPartition {
    /// The input subset generating this partition; `None` for partitions
    /// derived by meets.
    pub subset: Option<SubsetMask>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl AtomPartition {
    fn from_labels(subset: Option<SubsetMask>, labels: &[usize]) -> Self {
        // Relabel in order of first appearance, which makes blocks canonical.
        let mut relabel: HashMap<usize, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (atom, &l) in labels.iter().enumerate() {
            let b = *relabel.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(atom);
            block_of.push(b);
        }
        AtomPartition {
            subset,
            blocks,
            block_of,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn atom_count(&self) -> usize {
        self.block_of.len()
    }

    /// Index of the block containing `atom`.
    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn same_blocks(&self, other: &AtomPartition) -> bool {
        self.blocks == other.blocks
    }
}

impl PartialEq for AtomPartition {
    fn eq(&self, other: &Self) -> bool {
        self.same_blocks(other)
    }
}

/// Groups atoms by their coordinates on `a`.
pub fn partition_by(support: &SupportAtoms, a: SubsetMask) -> AtomPartition {
    let mut keys: HashMap<Vec<usize>, usize> = HashMap::new();
    let labels: Vec<usize> = support
        .coords
        .iter()
        .map(|c| {
            let key: Vec<usize> = a.positions().map(|i| c[i]).collect();
            let next = keys.len();
            *keys.entry(key).or_insert(next)
        })
        .collect();
    AtomPartition::from_labels(Some(a), &labels)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller root so labels stay stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// The finest partition coarser than both inputs: its measurable sets are
/// exactly the events measurable with respect to both σ-algebras.
pub fn sigma_meet(p: &AtomPartition, q: &AtomPartition) -> Result<AtomPartition> {
    if p.atom_count() != q.atom_count() {
        return Err(Error::MismatchedAtoms(p.atom_count(), q.atom_count()));
    }
    let mut uf = UnionFind::new(p.atom_count());
    for block in p.blocks.iter().chain(&q.blocks) {
        for w in block.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let labels: Vec<usize> = (0..p.atom_count()).map(|a| uf.find(a)).collect();
    let subset = match (p.subset, q.subset) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    };
    Ok(AtomPartition::from_labels(subset, &labels))
}

/// Which subset pairs an Assumption-1 check visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    /// Every non-nested pair for `d <= 8`; a deterministic sample above.
    Auto,
    /// Every non-nested pair regardless of `d`.
    Exhaustive,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Assumption1Report {
    pub pass: bool,
    pub exhaustive: bool,
    pub pairs_checked: usize,
    pub violations: Vec<(SubsetMask, SubsetMask)>,
}

fn all_partitions(support: &SupportAtoms) -> Vec<AtomPartition> {
    let mut parts: Vec<Option<AtomPartition>> = vec![None; 1 << support.d()];
    for a in SubsetMask::full(support.d()).subsets() {
        parts[a.index()] = Some(partition_by(support, a));
    }
    parts.into_iter().map(|p| p.expect("every subset visited")).collect()
}

fn assumption1_pairs(d: usize, selection: PairSelection) -> (bool, Vec<(SubsetMask, SubsetMask)>) {
    let all = SubsetMask::full(d).subsets();
    let exhaustive = selection == PairSelection::Exhaustive || d <= EXHAUSTIVE_PAIR_LIMIT;
    let mut pairs = BTreeSet::new();
    if exhaustive {
        for (i, &a) in all.iter().enumerate() {
            for &b in &all[i + 1..] {
                if !a.is_comparable_with(b) {
                    pairs.insert((a, b));
                }
            }
        }
    } else {
        let small: Vec<SubsetMask> = all.iter().copied().filter(|s| s.len() <= 3).collect();
        for (i, &a) in small.iter().enumerate() {
            for &b in &small[i + 1..] {
                if !a.is_comparable_with(b) {
                    pairs.insert((a, b));
                }
            }
        }
        for &a in &all {
            let b = a.complement(d);
            if !a.is_comparable_with(b) {
                pairs.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
    }
    (exhaustive, pairs.into_iter().collect())
}

/// Checks `σ_A ∩ σ_B = σ_{A∩B}` on the selected subset pairs. Nested pairs
/// satisfy the identity trivially and are not visited.
pub fn check_assumption1(support: &SupportAtoms, selection: PairSelection) -> Assumption1Report {
    let parts = all_partitions(support);
    let (exhaustive, pairs) = assumption1_pairs(support.d(), selection);
    let violations: Vec<(SubsetMask, SubsetMask)> = pairs
        .par_iter()
        .filter(|(a, b)| {
            let meet = sigma_meet(&parts[a.index()], &parts[b.index()])
                .expect("partitions share the support");
            !meet.same_blocks(&parts[a.intersection(*b).index()])
        })
        .copied()
        .collect();
    Assumption1Report {
        pass: violations.is_empty(),
        exhaustive,
        pairs_checked: pairs.len(),
        violations,
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NestingReport {
    pub pass: bool,
    pub pairs_checked: usize,
    /// `(B, A)` with `B ⊂ A` where `σ_A` fails to strictly refine `σ_B`.
    pub failures: Vec<(SubsetMask, SubsetMask)>,
}

/// Verifies `σ_B ⊂ σ_A` strictly for every `B ⊂ A`, which includes
/// non-triviality of each single-input σ-algebra (the pairs `(∅, {i})`).
pub fn check_strict_nesting(support: &SupportAtoms) -> NestingReport {
    let d = support.d();
    let all = enumerate_subsets(d).expect("validated support has 1..=12 inputs");
    let counts: Vec<usize> = {
        let mut c = vec![0; 1 << d];
        for a in &all {
            c[a.index()] = partition_by(support, *a).block_count();
        }
        c
    };
    let mut pairs_checked = 0;
    let mut failures = Vec::new();
    for &a in &all {
        for b in a.proper_subsets() {
            pairs_checked += 1;
            if counts[b.index()] >= counts[a.index()] {
                failures.push((b, a));
            }
        }
    }
    NestingReport {
        pass: failures.is_empty(),
        pairs_checked,
        failures,
    }
}

/// On-disk layout of the joint law inside an input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PmfSpec {
    Dense { values: Vec<f64> },
    Sparse { cells: Vec<SparseCell> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseCell {
    pub cell: Vec<usize>,
    pub p: f64,
}

/// One input file: the law of the inputs and the model table on the full grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputFile {
    pub inputs: Vec<InputSpec>,
    pub pmf: PmfSpec,
    pub model: Vec<f64>,
}

/// A parsed input: joint law plus full-grid model values.
#[derive(Debug, Clone)]
pub struct Problem {
    pub pmf: JointPmf,
    pub model: Vec<f64>,
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InputFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        file.into_problem()
    }
}

impl InputFile {
    pub fn into_problem(self) -> Result<Problem> {
        let shape: Vec<usize> = self.inputs.iter().map(|i| i.levels.len()).collect();
        if shape.is_empty() || shape.len() > MAX_INPUTS {
            return Err(Error::InputCountOutOfRange(shape.len()));
        }
        let size = grid_size(&shape);
        let weights = match self.pmf {
            PmfSpec::Dense { values } => {
                if values.len() != size {
                    return Err(Error::InvalidInput(format!(
                        "dense pmf has {} values, grid has {size} cells",
                        values.len()
                    )));
                }
                values
            }
            PmfSpec::Sparse { cells } => {
                let mut w = vec![0.0; size];
                let mut seen = BTreeSet::new();
                for SparseCell { cell, p } in cells {
                    let idx = cell_index(&shape, &cell).ok_or_else(|| {
                        Error::InvalidInput(format!("sparse cell {cell:?} is outside the grid"))
                    })?;
                    if !seen.insert(idx) {
                        return Err(Error::InvalidInput(format!(
                            "sparse cell {cell:?} listed twice"
                        )));
                    }
                    w[idx] = p;
                }
                w
            }
        };
        if self.model.len() != size {
            return Err(Error::InvalidInput(format!(
                "model has {} values, grid has {size} cells",
                self.model.len()
            )));
        }
        if let Some(i) = self.model.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("model value at grid cell {i} is not finite")));
        }
        Ok(Problem {
            pmf: JointPmf::new(self.inputs, weights),
            model: self.model,
        })
    }
}
