//! Weighted finite-dimensional Hilbert-space numerics.
//!
//! Functions of the inputs are vectors of values on the support atoms, with
//! inner product `<f, g> = Σ p_i f_i g_i`. A subspace is carried as a
//! [`WeightedBasis`] whose columns are orthonormal for that inner product.
//! Internally every computation maps to the Euclidean setting through
//! `diag(sqrt(p))`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{partition_by, Assumption1Report, SupportAtoms};
use crate::error::{Error, Result};
use crate::lattice::SubsetMask;

/// Relative tolerance for rank decisions, orthogonality and reconstruction.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Positive-definiteness threshold on the smallest eigenvalue of Δ.
pub const DEFAULT_EPS_PD: f64 = 1e-10;

/// A subspace of functions on the atoms, stored as P-orthonormal columns.
#[derive(Debug, Clone)]
pub struct WeightedBasis {
    /// Generating subset when the basis represents a subset-indexed space.
    pub subset: Option<SubsetMask>,
    columns: DMatrix<f64>,
    weights: Arc<[f64]>,
}

impl WeightedBasis {
    pub fn empty(weights: Arc<[f64]>) -> Self {
        let n = weights.len();
        WeightedBasis {
            subset: None,
            columns: DMatrix::zeros(n, 0),
            weights,
        }
    }

    pub fn with_subset(mut self, subset: SubsetMask) -> Self {
        self.subset = Some(subset);
        self
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shared_weights(&self) -> Arc<[f64]> {
        self.weights.clone()
    }

    /// `Bᵀ diag(p) B`, which is the identity up to rounding.
    pub fn gram(&self) -> DMatrix<f64> {
        cross_gram(&self.columns, &self.columns, &self.weights)
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Coordinates `Bᵀ diag(p) f` of the orthogonal projection of `f`.
    pub fn coordinates(&self, f: &[f64]) -> DVector<f64> {
        let pf = DVector::from_iterator(f.len(), f.iter().zip(self.weights.iter()).map(|(x, w)| x * w));
        self.columns.tr_mul(&pf)
    }

    /// Orthogonal projection of `f` onto the span.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        if self.dim() == 0 {
            return vec![0.0; f.len()];
        }
        (&self.columns * self.coordinates(f)).as_slice().to_vec()
    }

    /// The same subspace with its columns taken in `order`, a permutation of `0..dim`.
    pub fn reordered(&self, order: &[usize]) -> WeightedBasis {
        assert_eq!(order.len(), self.dim(), "order must permute every column");
        WeightedBasis {
            subset: self.subset,
            columns: self.columns.select_columns(order),
            weights: self.weights.clone(),
        }
    }

    /// Linear combination of the columns.
    pub fn combine(&self, coefficients: &[f64]) -> Vec<f64> {
        if self.dim() == 0 {
            return vec![0.0; self.n()];
        }
        (&self.columns * DVector::from_column_slice(coefficients)).as_slice().to_vec()
    }
}

/// `Xᵀ diag(p) Y`.
pub fn cross_gram(x: &DMatrix<f64>, y: &DMatrix<f64>, p: &[f64]) -> DMatrix<f64> {
    let mut py = y.clone();
    for (i, w) in p.iter().enumerate() {
        py.row_mut(i).scale_mut(*w);
    }
    x.tr_mul(&py)
}

pub fn weighted_inner(f: &[f64], g: &[f64], p: &[f64]) -> f64 {
    f.iter().zip(g).zip(p).map(|((a, b), w)| w * a * b).sum()
}

pub fn weighted_norm(f: &[f64], p: &[f64]) -> f64 {
    weighted_inner(f, f, p).max(0.0).sqrt()
}

pub fn weighted_mean(f: &[f64], p: &[f64]) -> f64 {
    f.iter().zip(p).map(|(a, w)| w * a).sum()
}

/// Covariance of two functions of the atoms under the weights `p`.
pub fn weighted_covariance(f: &[f64], g: &[f64], p: &[f64]) -> f64 {
    let (mf, mg) = (weighted_mean(f, p), weighted_mean(g, p));
    f.iter()
        .zip(g)
        .zip(p)
        .map(|((a, b), w)| w * (a - mf) * (b - mg))
        .sum()
}

pub fn weighted_variance(f: &[f64], p: &[f64]) -> f64 {
    weighted_covariance(f, f, p).max(0.0)
}

/// Orthonormal basis of the column span, keeping directions whose pivoted
/// residual norm exceeds `threshold` (absolute, in the weighted norm).
pub(crate) fn orthonormalize_above(
    vectors: &DMatrix<f64>,
    weights: Arc<[f64]>,
    threshold: f64,
) -> WeightedBasis {
    let n = vectors.nrows();
    if vectors.ncols() == 0 || n == 0 {
        return WeightedBasis::empty(weights);
    }
    let sqrt_p: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut scaled = vectors.clone();
    for (i, s) in sqrt_p.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*s);
    }
    let mut columns = pivoted_gram_schmidt(scaled, threshold);
    for (i, s) in sqrt_p.iter().enumerate() {
        columns.row_mut(i).scale_mut(1.0 / s);
    }
    // Fix the sign so the largest-magnitude entry of each column is positive.
    for mut col in columns.column_iter_mut() {
        let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    WeightedBasis {
        subset: None,
        columns,
        weights,
    }
}

/// Euclidean orthonormal basis of the column span: Gram-Schmidt taking the
/// remaining column of largest norm at each step, with a second
/// orthogonalization pass. Stops once every residual norm is at most
/// `threshold`.
fn pivoted_gram_schmidt(mut residual: DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let (n, m) = residual.shape();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut used = vec![false; m];
    while basis.len() < n.min(m) {
        let pick = (0..m)
            .filter(|&j| !used[j])
            .map(|j| (j, residual.column(j).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
        let Some((j, norm)) = pick else { break };
        if norm.is_nan() || norm <= threshold {
            break;
        }
        used[j] = true;
        let mut q = residual.column(j) / norm;
        for b in &basis {
            let c = b.dot(&q);
            q.axpy(-c, b, 1.0);
        }
        q /= q.norm();
        for k in (0..m).filter(|&k| !used[k]) {
            let c = q.dot(&residual.column(k));
            residual.column_mut(k).axpy(-c, &q, 1.0);
        }
        basis.push(q);
    }
    if basis.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&basis)
}

/// P-orthonormal basis of the span of `vectors`; directions are kept above
/// `tol · σ_max`.
pub fn weighted_orthonormalize(vectors: &DMatrix<f64>, p: &[f64], tol: f64) -> WeightedBasis {
    let weights: Arc<[f64]> = Arc::from(p);
    if vectors.ncols() == 0 {
        return WeightedBasis::empty(weights);
    }
    let mut scaled = vectors.clone();
    for (i, w) in p.iter().enumerate() {
        scaled.row_mut(i).scale_mut(w.sqrt());
    }
    let sigma_max = scaled.singular_values().max();
    if sigma_max == 0.0 {
        return WeightedBasis::empty(weights);
    }
    orthonormalize_above(vectors, weights, tol * sigma_max)
}

/// `X - Q Qᵀ diag(p) X`, applied twice for stability.
pub(crate) fn project_out(x: &DMatrix<f64>, q: &WeightedBasis) -> DMatrix<f64> {
    if q.dim() == 0 {
        return x.clone();
    }
    let mut r = x.clone();
    for _ in 0..2 {
        let coords = cross_gram(q.columns(), &r, q.weights());
        r -= q.columns() * coords;
    }
    r
}

/// Basis of `(span X) ⊖ Q`: project out `Q` then re-orthonormalize. `X` is
/// expected to have unit-scale columns, so `tol` acts as an absolute rank
/// threshold.
pub(crate) fn quotient(x: &WeightedBasis, q: &WeightedBasis, tol: f64) -> WeightedBasis {
    let residual = project_out(x.columns(), q);
    orthonormalize_above(&residual, x.shared_weights(), tol)
}

/// Orthonormal basis of `L²(σ_A)`: normalized indicators of the blocks of the
/// partition generated by `X_A`.
pub fn marginal_space_basis(support: &SupportAtoms, a: SubsetMask) -> WeightedBasis {
    let weights: Arc<[f64]> = Arc::from(support.weights());
    marginal_space_basis_shared(support, a, weights)
}

pub(crate) fn marginal_space_basis_shared(
    support: &SupportAtoms,
    a: SubsetMask,
    weights: Arc<[f64]>,
) -> WeightedBasis {
    let part = partition_by(support, a);
    let mut columns = DMatrix::zeros(support.n(), part.block_count());
    for (b, block) in part.blocks().iter().enumerate() {
        let mass: f64 = block.iter().map(|&i| weights[i]).sum();
        let height = 1.0 / mass.sqrt();
        for &i in block {
            columns[(i, b)] = height;
        }
    }
    WeightedBasis {
        subset: Some(a),
        columns,
        weights,
    }
}

/// Cosine of the minimal angle between two subspaces: the largest singular
/// value of `B_Hᵀ diag(p) B_K`, or 0 when either is trivial.
pub fn dixmier_angle(h: &WeightedBasis, k: &WeightedBasis) -> f64 {
    if h.dim() == 0 || k.dim() == 0 {
        return 0.0;
    }
    let m = cross_gram(h.columns(), k.columns(), h.weights());
    m.singular_values().max().clamp(0.0, 1.0)
}

/// Evidence that the intersection identity `L²(σ_A) ∩ L²(σ_B) = L²(σ_{A∩B})`
/// may be relied on.
#[derive(Debug, Clone, Copy)]
pub enum Verification<'a> {
    Checked(&'a Assumption1Report),
    /// Caller takes responsibility; results may be meaningless.
    Skipped,
}

impl Verification<'_> {
    fn require(&self) -> Result<()> {
        match self {
            Verification::Checked(report) if !report.pass => Err(Error::Assumption1NotVerified),
            _ => Ok(()),
        }
    }
}

fn friedrichs_from_bases(
    ha: &WeightedBasis,
    hb: &WeightedBasis,
    hc: &WeightedBasis,
    tol: f64,
) -> f64 {
    let qa = quotient(ha, hc, tol);
    let qb = quotient(hb, hc, tol);
    dixmier_angle(&qa, &qb)
}

/// Cosine of the Friedrichs angle between `L²(σ_A)` and `L²(σ_B)`.
///
/// The intersection is taken as `L²(σ_{A∩B})`, so both spaces are reduced
/// modulo it before measuring their minimal angle. Nested pairs have a trivial
/// quotient and return 0.
pub fn friedrichs_angle(
    support: &SupportAtoms,
    a: SubsetMask,
    b: SubsetMask,
    verification: Verification<'_>,
    tol: f64,
) -> Result<f64> {
    verification.require()?;
    if a.is_comparable_with(b) {
        return Ok(0.0);
    }
    let weights: Arc<[f64]> = Arc::from(support.weights());
    let ha = marginal_space_basis_shared(support, a, weights.clone());
    let hb = marginal_space_basis_shared(support, b, weights.clone());
    let hc = marginal_space_basis_shared(support, a.intersection(b), weights);
    Ok(friedrichs_from_bases(&ha, &hb, &hc, tol))
}

/// Symmetric subset-indexed matrix with unit diagonal and negative
/// Friedrichs-angle cosines off the diagonal.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FeshchenkoMatrix {
    pub d: usize,
    /// Row/column labels in canonical order.
    pub subsets: Vec<SubsetMask>,
    #[serde(serialize_with = "serialize_rows")]
    pub entries: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

fn serialize_rows<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()))
}

pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenFailure("symmetric eigen-solve did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

impl FeshchenkoMatrix {
    /// Wraps a precomputed matrix in canonical subset order.
    pub fn from_entries(d: usize, entries: DMatrix<f64>) -> Result<Self> {
        let subsets = SubsetMask::full(d).subsets();
        if entries.nrows() != subsets.len() || entries.ncols() != subsets.len() {
            return Err(Error::LengthMismatch {
                expected: subsets.len(),
                found: entries.nrows(),
            });
        }
        let min_eigenvalue = min_symmetric_eigenvalue(&entries)?;
        Ok(FeshchenkoMatrix {
            d,
            subsets,
            entries,
            min_eigenvalue,
        })
    }

    fn position(&self, a: SubsetMask) -> usize {
        self.subsets.binary_search(&a).expect("subset belongs to the lattice")
    }

    pub fn get(&self, a: SubsetMask, b: SubsetMask) -> f64 {
        self.entries[(self.position(a), self.position(b))]
    }

    /// Principal submatrix on the given subsets (in the given order).
    pub fn submatrix(&self, subsets: &[SubsetMask]) -> DMatrix<f64> {
        let idx: Vec<usize> = subsets.iter().map(|s| self.position(*s)).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.entries[(idx[i], idx[j])])
    }

    /// Smallest eigenvalue of the principal submatrix over the proper subsets
    /// of `a`, the empty set included.
    pub fn proper_subset_min_eigenvalue(&self, a: SubsetMask) -> Result<f64> {
        min_symmetric_eigenvalue(&self.submatrix(&a.proper_subsets()))
    }
}

/// Assembles Δ over all `2^d` subsets. The off-diagonal angle computations
/// run in parallel; the result does not depend on scheduling.
pub fn feshchenko_matrix(
    support: &SupportAtoms,
    verification: Verification<'_>,
    tol: f64,
) -> Result<FeshchenkoMatrix> {
    verification.require()?;
    let d = support.d();
    let subsets = SubsetMask::full(d).subsets();
    let weights: Arc<[f64]> = Arc::from(support.weights());
    let mut marginals: Vec<Option<WeightedBasis>> = vec![None; 1 << d];
    for s in &subsets {
        marginals[s.index()] = Some(marginal_space_basis_shared(support, *s, weights.clone()));
    }
    let basis = |s: SubsetMask| marginals[s.index()].as_ref().expect("all subsets built");

    let m = subsets.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| !subsets[i].is_comparable_with(subsets[j]))
        .collect();
    let cosines: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (subsets[i], subsets[j]);
            friedrichs_from_bases(basis(a), basis(b), basis(a.intersection(b)), tol)
        })
        .collect();

    let mut entries = DMatrix::identity(m, m);
    for (&(i, j), c) in pairs.iter().zip(cosines) {
        entries[(i, j)] = -c;
        entries[(j, i)] = -c;
    }
    FeshchenkoMatrix::from_entries(d, entries)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Assumption2Report {
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub eps: f64,
}

/// Δ is accepted as positive definite when its smallest eigenvalue exceeds `eps`.
pub fn check_assumption2(delta: &FeshchenkoMatrix, eps: f64) -> Assumption2Report {
    Assumption2Report {
        pass: delta.min_eigenvalue > eps,
        min_eigenvalue: delta.min_eigenvalue,
        eps,
    }
}
