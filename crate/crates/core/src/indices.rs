//! Variance-based sensitivity indices built on the orthocanonical
//! decomposition.
//!
//! Two families split `V[G(X)]` exactly: the structural part `S^U_A = V[G_A]`
//! and the correlative part `S^C_A = Σ_{B ∈ U_A} Cov(G_A, G_B)`. Two more
//! families separate interaction from dependence: the pure interaction effect
//! (Sobol' index under the independent copy of the inputs, rescaled to
//! `V[G(X)]`) and the dependence effect `E[(Q_A G − P_A G)²]`. The last two do
//! not sum to the variance and are not presented as shares of it.

use serde::Serialize;

use crate::decomposition::{
    decompose, hoeffding_classical, oblique_m, orthogonal_p, ComponentBasisSet, Decomposition,
};
use crate::distribution::{validate_pmf, SupportAtoms};
use crate::error::{Error, Result};
use crate::hilbert::{weighted_covariance, weighted_mean, weighted_norm, weighted_variance};
use crate::lattice::{uncomparables, SubsetMask};

/// Centering tolerance on the oblique/orthogonal gap, relative to `‖G‖`.
pub const CENTERING_TOL: f64 = 1e-10;

/// `S^U_A = V[G_A]`.
pub fn structural_index(dec: &Decomposition, a: SubsetMask) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    weighted_variance(dec.component(a), dec.weights())
}

/// `S^C_A = Σ_{B ∈ U_A} Cov(G_A, G_B)`.
pub fn correlative_index(dec: &Decomposition, a: SubsetMask) -> f64 {
    uncomparables(a, dec.d())
        .into_iter()
        .map(|b| weighted_covariance(dec.component(a), dec.component(b), dec.weights()))
        .sum()
}

fn complement_of_m(dec: &Decomposition, a: SubsetMask) -> Vec<f64> {
    oblique_m(dec, a)
        .iter()
        .zip(dec.model())
        .map(|(m, g)| g - m)
        .collect()
}

/// `S^C_A` through the oblique projections:
/// `Σ_{B ⊆ A} (-1)^{|A|-|B|} Cov(M_B[G], (I − M_A)[G])`.
pub fn correlative_index_via_projections(dec: &Decomposition, a: SubsetMask) -> f64 {
    let rest = complement_of_m(dec, a);
    a.subsets()
        .into_iter()
        .map(|b| a.mobius_sign(b) * weighted_covariance(&oblique_m(dec, b), &rest, dec.weights()))
        .sum()
}

/// `S^U_A` through the oblique projections:
/// `Σ_{B ⊆ A} (-1)^{|A|-|B|} [Cov(M_B[G], G) − Cov(M_B[G], (I − M_A)[G])]`.
///
/// The bracket equals `Cov(M_B[G], M_A[G])`; replacing the first term by
/// `V[M_B[G]]` is only valid when the components are pairwise uncorrelated.
pub fn structural_index_via_projections(dec: &Decomposition, a: SubsetMask) -> f64 {
    let rest = complement_of_m(dec, a);
    let p = dec.weights();
    a.subsets()
        .into_iter()
        .map(|b| {
            let mb = oblique_m(dec, b);
            a.mobius_sign(b)
                * (weighted_covariance(&mb, dec.model(), p) - weighted_covariance(&mb, &rest, p))
        })
        .sum()
}

/// `Q_A(G) − P_A(G)` on the atoms.
fn oblique_orthogonal_gap(dec: &Decomposition, bases: &ComponentBasisSet, a: SubsetMask) -> Vec<f64> {
    let orth = orthogonal_p(bases, dec.model(), a);
    dec.component(a).iter().zip(&orth).map(|(q, p)| q - p).collect()
}

/// `S^D_A = E[(Q_A(G) − P_A(G))²]`.
pub fn dependence_effect(dec: &Decomposition, bases: &ComponentBasisSet, a: SubsetMask) -> f64 {
    let gap = oblique_orthogonal_gap(dec, bases, a);
    let norm = weighted_norm(&gap, dec.weights());
    norm * norm
}

/// Pure interaction effects for every subset, computed under the product law
/// with the same marginals. `model` is the full-grid table.
///
/// Returns `DegenerateTilde` when the model is constant on the product
/// support.
pub fn pure_interaction_all(
    support: &SupportAtoms,
    model: &[f64],
    tol: f64,
) -> Result<Vec<(SubsetMask, f64)>> {
    let g = support.restrict(model)?;
    let model_variance = weighted_variance(&g, support.weights());

    let tilde = validate_pmf(&support.to_pmf().independent_copy())?;
    let g_tilde = tilde.restrict(model)?;
    let tilde_variance = weighted_variance(&g_tilde, tilde.weights());
    let second_moment = weighted_norm(&g_tilde, tilde.weights()).powi(2);
    if tilde_variance <= tol * tol * second_moment || tilde_variance == 0.0 {
        return Err(Error::DegenerateTilde);
    }
    let dec = hoeffding_classical(&tilde, &g_tilde)?;
    Ok(dec
        .subsets()
        .into_iter()
        .map(|a| {
            let share = structural_index(&dec, a) / tilde_variance;
            (a, share * model_variance)
        })
        .collect())
}

/// Pure interaction effect of a single subset.
pub fn pure_interaction(
    support: &SupportAtoms,
    model: &[f64],
    a: SubsetMask,
    tol: f64,
) -> Result<f64> {
    Ok(pure_interaction_all(support, model, tol)?
        .into_iter()
        .find(|(b, _)| *b == a)
        .map(|(_, v)| v)
        .unwrap_or(0.0))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexRow {
    pub subset: SubsetMask,
    pub structural: f64,
    pub correlative: f64,
    pub pure_interaction: f64,
    /// `S_A / V[G(X)]`; a display convenience, absent when the variance is 0.
    pub pure_interaction_normalized: Option<f64>,
    pub dependence_effect: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SensitivityReport {
    pub model_variance: f64,
    pub sum_structural: f64,
    pub sum_correlative: f64,
    /// `|Σ S^U + Σ S^C − V[G]|`.
    pub identity_residual: f64,
    /// Largest gap between `S^U_A` and its projection formula.
    pub structural_cross_check: f64,
    /// Largest gap between `S^C_A` and its projection formula.
    pub correlative_cross_check: f64,
    pub rows: Vec<IndexRow>,
    pub warnings: Vec<String>,
}

impl SensitivityReport {
    pub fn row(&self, a: SubsetMask) -> &IndexRow {
        self.rows.iter().find(|r| r.subset == a).expect("every subset reported")
    }
}

/// All four index families plus the identity and cross-formula checks.
pub fn variance_report(
    support: &SupportAtoms,
    bases: &ComponentBasisSet,
    dec: &Decomposition,
    model: &[f64],
    tol: f64,
) -> Result<SensitivityReport> {
    let mut warnings = Vec::new();
    let pure = match pure_interaction_all(support, model, tol) {
        Ok(values) => values,
        Err(Error::DegenerateTilde) => {
            warnings.push(
                "model is constant on the product support; pure interaction effects set to 0"
                    .to_string(),
            );
            dec.subsets().into_iter().map(|a| (a, 0.0)).collect()
        }
        Err(e) => return Err(e),
    };

    let model_variance = dec.total_variance;
    let model_norm = dec.model_norm();
    let mut rows = Vec::new();
    let (mut sum_structural, mut sum_correlative) = (0.0, 0.0);
    let (mut structural_cross_check, mut correlative_cross_check) = (0.0f64, 0.0f64);
    for (a, pure_value) in pure {
        let structural = structural_index(dec, a);
        let correlative = correlative_index(dec, a);
        structural_cross_check = structural_cross_check
            .max((structural - structural_index_via_projections(dec, a)).abs());
        correlative_cross_check = correlative_cross_check
            .max((correlative - correlative_index_via_projections(dec, a)).abs());
        sum_structural += structural;
        sum_correlative += correlative;

        let gap = oblique_orthogonal_gap(dec, bases, a);
        let gap_mean = weighted_mean(&gap, dec.weights());
        if gap_mean.abs() > CENTERING_TOL * model_norm.max(f64::MIN_POSITIVE) {
            warnings.push(format!(
                "oblique/orthogonal gap for {a} is not centered (mean {gap_mean:e})"
            ));
        }
        rows.push(IndexRow {
            subset: a,
            structural,
            correlative,
            pure_interaction: pure_value,
            pure_interaction_normalized: (model_variance > 0.0).then(|| pure_value / model_variance),
            dependence_effect: dependence_effect(dec, bases, a),
        });
    }
    Ok(SensitivityReport {
        model_variance,
        sum_structural,
        sum_correlative,
        identity_residual: (sum_structural + sum_correlative - model_variance).abs(),
        structural_cross_check,
        correlative_cross_check,
        rows,
        warnings,
    })
}

/// Convenience wrapper: decomposition and report from a support and a
/// full-grid model.
pub fn variance_report_for(
    support: &SupportAtoms,
    bases: &ComponentBasisSet,
    model: &[f64],
    tol: f64,
) -> Result<(Decomposition, SensitivityReport)> {
    let g = support.restrict(model)?;
    let dec = decompose(bases, &g, tol)?;
    let report = variance_report(support, bases, &dec, model, tol)?;
    Ok((dec, report))
}

/// Per-subset attribution `G_A(x_A)` of the model value at one grid cell.
pub fn evaluation_explanation(
    dec: &Decomposition,
    support: &SupportAtoms,
    cell: &[usize],
) -> Result<Vec<(SubsetMask, f64)>> {
    let atom = support
        .atom_of(cell)
        .ok_or_else(|| Error::CellNotInSupport(cell.to_vec()))?;
    Ok(dec
        .subsets()
        .into_iter()
        .map(|a| (a, dec.component(a)[atom]))
        .collect())
}
