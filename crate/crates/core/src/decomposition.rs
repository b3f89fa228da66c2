//! Construction of the component subspaces `V_A` and the unique expansion of a
//! model table over them.
//!
//! Subsets are visited in canonical order. `V_∅` is the constants; every other
//! `V_A` is the orthogonal complement, inside `L²(σ_A)`, of the sum of the
//! already-built `V_B` for `B ⊂ A`. Under the two admissibility conditions the
//! `V_A` form a direct sum of `L²(σ_X)`, so a model has exactly one
//! representation `G = Σ_A G_A` with `G_A ∈ V_A`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::distribution::{partition_by, SupportAtoms};
use crate::error::{Error, Result};
use crate::hilbert::{
    marginal_space_basis_shared, quotient, weighted_mean, weighted_norm, weighted_orthonormalize,
    WeightedBasis,
};
use crate::lattice::{mobius_alternating_sum, SubsetMask};

/// Largest admissible condition number of the stacked component basis.
pub const MAX_CONDITION: f64 = 1e12;

/// Tolerance on the joint table being the product of its marginals.
pub const PRODUCT_FORM_TOL: f64 = 1e-12;

/// Orthonormal bases of every `V_A`, indexed by subset.
#[derive(Debug, Clone)]
pub struct ComponentBasisSet {
    d: usize,
    bases: Vec<WeightedBasis>,
}

impl ComponentBasisSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self, a: SubsetMask) -> &WeightedBasis {
        &self.bases[a.index()]
    }

    pub fn dim(&self, a: SubsetMask) -> usize {
        self.bases[a.index()].dim()
    }

    /// `(A, k_A)` in canonical order.
    pub fn dims(&self) -> Vec<(SubsetMask, usize)> {
        self.subsets().into_iter().map(|a| (a, self.dim(a))).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(WeightedBasis::dim).sum()
    }

    pub fn subsets(&self) -> Vec<SubsetMask> {
        SubsetMask::full(self.d).subsets()
    }

    pub fn weights(&self) -> &[f64] {
        self.bases[0].weights()
    }

    /// Copy with the columns of each `V_A` permuted by `order(A, k_A)`.
    pub fn reorder_columns<F>(&self, mut order: F) -> ComponentBasisSet
    where
        F: FnMut(SubsetMask, usize) -> Vec<usize>,
    {
        let bases = self
            .bases
            .iter()
            .map(|b| {
                let a = b.subset.expect("component bases carry their subset");
                b.reordered(&order(a, b.dim()))
            })
            .collect();
        ComponentBasisSet { d: self.d, bases }
    }
}

/// Builds `V_A` for every subset. Fails with `DimensionMismatch` when the
/// dimensions do not add up to the number of atoms, which happens when the
/// admissibility conditions do not hold or the tolerance is too loose.
pub fn build_component_subspaces(support: &SupportAtoms, tol: f64) -> Result<ComponentBasisSet> {
    let d = support.d();
    let n = support.n();
    let weights: Arc<[f64]> = Arc::from(support.weights());
    let mut bases: Vec<Option<WeightedBasis>> = vec![None; 1 << d];

    for a in SubsetMask::full(d).subsets() {
        let marginal = marginal_space_basis_shared(support, a, weights.clone());
        let v_a = if a.is_empty() {
            marginal
        } else {
            let lower: Vec<&WeightedBasis> = a
                .proper_subsets()
                .into_iter()
                .map(|b| bases[b.index()].as_ref().expect("built in canonical order"))
                .collect();
            let width: usize = lower.iter().map(|b| b.dim()).sum();
            let mut stacked = DMatrix::zeros(n, width);
            let mut col = 0;
            for b in lower {
                stacked.columns_mut(col, b.dim()).copy_from(b.columns());
                col += b.dim();
            }
            let span = weighted_orthonormalize(&stacked, &weights, tol);
            quotient(&marginal, &span, tol)
        };
        bases[a.index()] = Some(v_a.with_subset(a));
    }

    let set = ComponentBasisSet {
        d,
        bases: bases.into_iter().map(|b| b.expect("all subsets built")).collect(),
    };
    if set.total_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: set.total_dim(),
        });
    }
    Ok(set)
}

/// The components `G_A` of one model table, on the support atoms.
#[derive(Debug, Clone)]
pub struct Decomposition {
    d: usize,
    weights: Arc<[f64]>,
    model: Vec<f64>,
    components: Vec<Vec<f64>>,
    /// Coordinates of each `G_A` in the `V_A` basis; absent for decompositions
    /// computed without bases.
    coefficients: Option<Vec<Vec<f64>>>,
    pub total_variance: f64,
    /// Condition number of the stacked basis in the weighted norm.
    pub condition_number: Option<f64>,
    /// `‖Σ_A G_A − G‖_P`.
    pub reconstruction_residual: f64,
}

impl Decomposition {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.model.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Model values on the atoms.
    pub fn model(&self) -> &[f64] {
        &self.model
    }

    pub fn subsets(&self) -> Vec<SubsetMask> {
        SubsetMask::full(self.d).subsets()
    }

    pub fn component(&self, a: SubsetMask) -> &[f64] {
        &self.components[a.index()]
    }

    pub fn coefficients(&self, a: SubsetMask) -> Option<&[f64]> {
        self.coefficients.as_ref().map(|c| c[a.index()].as_slice())
    }

    pub fn model_norm(&self) -> f64 {
        weighted_norm(&self.model, &self.weights)
    }

    fn assemble(
        d: usize,
        weights: Arc<[f64]>,
        model: Vec<f64>,
        components: Vec<Vec<f64>>,
        coefficients: Option<Vec<Vec<f64>>>,
        condition_number: Option<f64>,
    ) -> Self {
        let mut sum = vec![0.0; model.len()];
        for c in &components {
            sum.iter_mut().zip(c).for_each(|(s, x)| *s += x);
        }
        let gap: Vec<f64> = sum.iter().zip(&model).map(|(s, g)| s - g).collect();
        let reconstruction_residual = weighted_norm(&gap, &weights);
        let mean = weighted_mean(&model, &weights);
        let total_variance = model
            .iter()
            .zip(weights.iter())
            .map(|(g, w)| w * (g - mean) * (g - mean))
            .sum();
        Decomposition {
            d,
            weights,
            model,
            components,
            coefficients,
            total_variance,
            condition_number,
            reconstruction_residual,
        }
    }
}

fn check_model(support_n: usize, g: &[f64]) -> Result<()> {
    if g.len() != support_n {
        return Err(Error::LengthMismatch {
            expected: support_n,
            found: g.len(),
        });
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("model value on atom {i} is not finite")));
    }
    Ok(())
}

/// Expands `g` (values on the atoms) over the component subspaces by solving
/// the square system `[B_∅ | B_{1} | ... | B_D] c = g`.
pub fn decompose(bases: &ComponentBasisSet, g: &[f64], tol: f64) -> Result<Decomposition> {
    let weights: Arc<[f64]> = bases.bases[0].shared_weights();
    let n = weights.len();
    check_model(n, g)?;
    if bases.total_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bases.total_dim(),
        });
    }
    let order = bases.subsets();
    let sqrt_p: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();

    let mut system = DMatrix::zeros(n, n);
    let mut col = 0;
    for a in &order {
        let b = bases.basis(*a);
        system.columns_mut(col, b.dim()).copy_from(b.columns());
        col += b.dim();
    }
    let mut scaled = system;
    for (i, s) in sqrt_p.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*s);
    }
    let svd = scaled.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }

    let rhs = DVector::from_iterator(n, g.iter().zip(&sqrt_p).map(|(x, s)| x * s));
    let solve = |b: &DVector<f64>| -> DVector<f64> {
        svd.solve(b, 0.0).expect("both singular-vector sets computed")
    };
    let mut coeffs = solve(&rhs);
    // One step of iterative refinement.
    let residual = &rhs - &scaled * &coeffs;
    coeffs += solve(&residual);

    let mut components = vec![Vec::new(); 1 << bases.d];
    let mut coefficients = vec![Vec::new(); 1 << bases.d];
    let mut offset = 0;
    for a in &order {
        let b = bases.basis(*a);
        let c: Vec<f64> = coeffs.rows(offset, b.dim()).iter().copied().collect();
        components[a.index()] = b.combine(&c);
        coefficients[a.index()] = c;
        offset += b.dim();
    }

    let dec = Decomposition::assemble(
        bases.d,
        weights,
        g.to_vec(),
        components,
        Some(coefficients),
        Some(condition),
    );
    if dec.reconstruction_residual > tol * dec.model_norm() {
        return Err(Error::ReconstructionFailed {
            residual: dec.reconstruction_residual,
        });
    }
    Ok(dec)
}

/// `M_A[G] = Σ_{B ⊆ A} G_B`, the oblique projection onto `L²(σ_A)` along the
/// components not indexed by subsets of `A`.
pub fn oblique_m(dec: &Decomposition, a: SubsetMask) -> Vec<f64> {
    let mut out = vec![0.0; dec.n()];
    for b in a.subsets() {
        out.iter_mut().zip(dec.component(b)).for_each(|(s, x)| *s += x);
    }
    out
}

/// `E[G | X_A]`: weighted block averages over the partition generated by `X_A`.
pub fn conditional_expectation(support: &SupportAtoms, g: &[f64], a: SubsetMask) -> Vec<f64> {
    let part = partition_by(support, a);
    let p = support.weights();
    let mut out = vec![0.0; g.len()];
    for block in part.blocks() {
        let mass: f64 = block.iter().map(|&i| p[i]).sum();
        let avg = block.iter().map(|&i| p[i] * g[i]).sum::<f64>() / mass;
        for &i in block {
            out[i] = avg;
        }
    }
    out
}

/// Orthogonal projection of `g` onto `V_A`.
pub fn orthogonal_p(bases: &ComponentBasisSet, g: &[f64], a: SubsetMask) -> Vec<f64> {
    bases.basis(a).project(g)
}

/// Largest weighted-norm gap between each stored `G_A` and the alternating sum
/// `Σ_{B ⊆ A} (-1)^{|A|-|B|} M_B[G]`.
pub fn verify_mobius(dec: &Decomposition) -> f64 {
    let m: BTreeMap<SubsetMask, Vec<f64>> =
        dec.subsets().into_iter().map(|a| (a, oblique_m(dec, a))).collect();
    dec.subsets()
        .into_iter()
        .map(|a| {
            let alt = mobius_alternating_sum(&m, a).expect("every subset present");
            let gap: Vec<f64> = alt.iter().zip(dec.component(a)).map(|(x, y)| x - y).collect();
            weighted_norm(&gap, dec.weights())
        })
        .fold(0.0, f64::max)
}

/// Classical Hoeffding decomposition for mutually independent inputs:
/// `G_A = Σ_{B ⊆ A} (-1)^{|A|-|B|} E[G | X_B]`.
pub fn hoeffding_classical(support: &SupportAtoms, g: &[f64]) -> Result<Decomposition> {
    check_model(support.n(), g)?;
    let deviation = support.product_form_deviation();
    if deviation > PRODUCT_FORM_TOL {
        return Err(Error::NotProductForm { deviation });
    }
    let d = support.d();
    let cond: BTreeMap<SubsetMask, Vec<f64>> = SubsetMask::full(d)
        .subsets()
        .into_iter()
        .map(|a| (a, conditional_expectation(support, g, a)))
        .collect();
    let mut components = vec![Vec::new(); 1 << d];
    for a in cond.keys() {
        components[a.index()] = mobius_alternating_sum(&cond, *a)?;
    }
    Ok(Decomposition::assemble(
        d,
        Arc::from(support.weights()),
        g.to_vec(),
        components,
        None,
        None,
    ))
}
