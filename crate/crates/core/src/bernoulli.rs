//! Closed-form decomposition for two Bernoulli inputs.
//!
//! With `P = diag(p00, p01, p10, p11)` the component subspaces are spanned by
//! four unit vectors in `R^4`:
//!
//! ```text
//!   v_∅  = (1, 1, 1, 1)
//!   v_1  = (g0, g0, g1, g1),  g0 = -sqrt(q1 / (1 - q1)),  g1 = sqrt((1 - q1) / q1)
//!   v_2  = (h0, h1, h0, h1),  h0 = -sqrt(q2 / (1 - q2)),  h1 = sqrt((1 - q2) / q2)
//!   v_12 ∝ (1/p00, -1/p01, -1/p10, 1/p11)
//! ```
//!
//! `v_12` is P-orthogonal to the constants and to every function of a single
//! input, since its P-weighted entries `(1, -1, -1, 1)` sum to zero along each
//! row and column of the 2×2 table. Signs follow the rule "last entry
//! positive". The coefficients then come from a 2×2 solve: `e` and `δ` are
//! plain projections, `(α, β)` solve the Gram system of `v_1, v_2`, whose
//! off-diagonal term is the Pearson correlation of the inputs.

use serde::Serialize;

use crate::distribution::{InputSpec, JointPmf};
use crate::error::{Error, Result};

/// Two Bernoulli inputs with success probabilities `q1`, `q2` and `rho = E[X1 X2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernoulliPair {
    pub q1: f64,
    pub q2: f64,
    pub rho: f64,
}

impl BernoulliPair {
    pub fn new(q1: f64, q2: f64, rho: f64) -> Result<Self> {
        let pair = BernoulliPair { q1, q2, rho };
        pair.check()?;
        Ok(pair)
    }

    /// The independent pair with the same marginals.
    pub fn independent(q1: f64, q2: f64) -> Result<Self> {
        Self::new(q1, q2, q1 * q2)
    }

    /// `(p00, p01, p10, p11)`.
    pub fn weights(&self) -> [f64; 4] {
        let BernoulliPair { q1, q2, rho } = *self;
        [1.0 - q1 - q2 + rho, q2 - rho, q1 - rho, rho]
    }

    fn check(&self) -> Result<()> {
        let BernoulliPair { q1, q2, rho } = *self;
        if ![q1, q2, rho].iter().all(|v| v.is_finite()) {
            return Err(Error::InadmissibleRho("parameters must be finite".into()));
        }
        if !(q1 > 0.0 && q1 < 1.0 && q2 > 0.0 && q2 < 1.0) {
            return Err(Error::InadmissibleRho(format!(
                "success probabilities must lie in (0, 1), got q1={q1}, q2={q2}"
            )));
        }
        if let Some(w) = self.weights().iter().find(|w| **w < 0.0) {
            return Err(Error::InadmissibleRho(format!(
                "rho={rho} induces a negative cell probability {w}"
            )));
        }
        Ok(())
    }

    /// Strict admissibility: every cell carries positive mass.
    pub fn is_full_support(&self) -> bool {
        self.weights().iter().all(|w| *w > 0.0)
    }

    /// Pearson correlation of `X1` and `X2`.
    pub fn correlation(&self) -> f64 {
        let BernoulliPair { q1, q2, rho } = *self;
        (rho - q1 * q2) / (q1 * (1.0 - q1) * q2 * (1.0 - q2)).sqrt()
    }
}

/// The 2×2 joint table in row-major order (`x1` slow, `x2` fast).
pub fn bernoulli_pmf(pair: &BernoulliPair) -> Result<JointPmf> {
    pair.check()?;
    Ok(JointPmf::new(
        vec![InputSpec::new("x1", &["0", "1"]), InputSpec::new("x2", &["0", "1"])],
        pair.weights().to_vec(),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct BernoulliVectors {
    pub empty: [f64; 4],
    pub v1: [f64; 4],
    pub v2: [f64; 4],
    pub v12: [f64; 4],
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BernoulliCoefficients {
    pub e: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

/// The four components `G_∅, G_1, G_2, G_12` as vectors over the cells.
#[derive(Debug, Clone, Serialize)]
pub struct BernoulliComponents {
    pub empty: [f64; 4],
    pub x1: [f64; 4],
    pub x2: [f64; 4],
    pub x12: [f64; 4],
}

impl BernoulliComponents {
    /// Components in canonical subset order (∅, {1}, {2}, {1,2}).
    pub fn ordered(&self) -> [[f64; 4]; 4] {
        [self.empty, self.x1, self.x2, self.x12]
    }
}

/// Per-subset index values, canonical order.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BernoulliIndices {
    pub model_variance: f64,
    pub structural: [f64; 4],
    pub correlative: [f64; 4],
    pub pure_interaction: [f64; 4],
    pub dependence_effect: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct BernoulliDecomposition {
    pub pair: BernoulliPair,
    pub weights: [f64; 4],
    pub vectors: BernoulliVectors,
    pub coefficients: BernoulliCoefficients,
    pub components: BernoulliComponents,
}

fn p_inner(p: &[f64; 4], x: &[f64; 4], y: &[f64; 4]) -> f64 {
    (0..4).map(|i| p[i] * x[i] * y[i]).sum()
}

fn scale(c: f64, v: &[f64; 4]) -> [f64; 4] {
    [c * v[0], c * v[1], c * v[2], c * v[3]]
}

fn unit_vectors(pair: &BernoulliPair) -> BernoulliVectors {
    let BernoulliPair { q1, q2, .. } = *pair;
    let p = pair.weights();
    // v_∅ᵀ P v_∅ = c² Σ p = 1
    let c = 1.0 / p.iter().sum::<f64>().sqrt();
    let (g0, g1) = (-(q1 / (1.0 - q1)).sqrt(), ((1.0 - q1) / q1).sqrt());
    let (h0, h1) = (-(q2 / (1.0 - q2)).sqrt(), ((1.0 - q2) / q2).sqrt());
    let k = [1.0 / p[0], -1.0 / p[1], -1.0 / p[2], 1.0 / p[3]];
    let k_norm = p_inner(&p, &k, &k).sqrt();
    BernoulliVectors {
        empty: [c; 4],
        v1: [g0, g0, g1, g1],
        v2: [h0, h1, h0, h1],
        v12: scale(1.0 / k_norm, &k),
    }
}

/// Solves the unit-vector system and the expansion `G = e v_∅ + α v_1 + β v_2 + δ v_12`.
pub fn closed_form_decomposition(pair: &BernoulliPair, g: [f64; 4]) -> Result<BernoulliDecomposition> {
    pair.check()?;
    if !pair.is_full_support() {
        return Err(Error::InadmissibleRho(
            "the closed form needs all four cells to carry positive mass".into(),
        ));
    }
    let p = pair.weights();
    let v = unit_vectors(pair);
    let e = p_inner(&p, &v.empty, &g);
    let delta = p_inner(&p, &v.v12, &g);
    let a = p_inner(&p, &v.v1, &g);
    let b = p_inner(&p, &v.v2, &g);
    let r = p_inner(&p, &v.v1, &v.v2);
    let det = 1.0 - r * r;
    let alpha = (a - r * b) / det;
    let beta = (b - r * a) / det;

    let components = BernoulliComponents {
        empty: scale(e, &v.empty),
        x1: scale(alpha, &v.v1),
        x2: scale(beta, &v.v2),
        x12: scale(delta, &v.v12),
    };
    Ok(BernoulliDecomposition {
        pair: *pair,
        weights: p,
        vectors: v,
        coefficients: BernoulliCoefficients { e, alpha, beta, delta },
        components,
    })
}

impl BernoulliDecomposition {
    /// The nine orthonormality constraints on the unit vectors, as residuals.
    pub fn constraint_residuals(&self) -> [f64; 9] {
        let p = &self.weights;
        let v = &self.vectors;
        [
            p_inner(p, &v.empty, &v.v1),
            p_inner(p, &v.empty, &v.v2),
            p_inner(p, &v.empty, &v.v12),
            p_inner(p, &v.v12, &v.v1),
            p_inner(p, &v.v12, &v.v2),
            p_inner(p, &v.empty, &v.empty) - 1.0,
            p_inner(p, &v.v1, &v.v1) - 1.0,
            p_inner(p, &v.v2, &v.v2) - 1.0,
            p_inner(p, &v.v12, &v.v12) - 1.0,
        ]
    }

    /// `Σ components − G`.
    pub fn reconstruction(&self) -> [f64; 4] {
        let c = self.components.ordered();
        [0, 1, 2, 3].map(|i| c.iter().map(|comp| comp[i]).sum())
    }

    /// All four index families from the closed form.
    ///
    /// With unit, centered `v_1, v_2, v_12` and `r = v_1ᵀ P v_2`:
    /// `S^U = (α², β², δ²)`, `S^C_1 = S^C_2 = αβr`, `S^D_1 = (rβ)²`,
    /// `S^D_2 = (rα)²`, `S^D_12 = 0`; pure interaction effects come from the
    /// same formulas at `rho = q1 q2`.
    pub fn indices(&self, g: [f64; 4]) -> Result<BernoulliIndices> {
        let BernoulliCoefficients { alpha, beta, delta, .. } = self.coefficients;
        let r = self.pair.correlation();
        let model_variance = alpha * alpha + beta * beta + delta * delta + 2.0 * alpha * beta * r;

        let tilde_pair = BernoulliPair::independent(self.pair.q1, self.pair.q2)?;
        let tilde = closed_form_decomposition(&tilde_pair, g)?;
        let t = tilde.coefficients;
        let tilde_variance = t.alpha * t.alpha + t.beta * t.beta + t.delta * t.delta;
        let pure_interaction = if tilde_variance > 0.0 {
            let s = model_variance / tilde_variance;
            [0.0, t.alpha * t.alpha * s, t.beta * t.beta * s, t.delta * t.delta * s]
        } else {
            [0.0; 4]
        };
        Ok(BernoulliIndices {
            model_variance,
            structural: [0.0, alpha * alpha, beta * beta, delta * delta],
            correlative: [0.0, alpha * beta * r, alpha * beta * r, 0.0],
            pure_interaction,
            dependence_effect: [0.0, (r * beta).powi(2), (r * alpha).powi(2), 0.0],
        })
    }
}
