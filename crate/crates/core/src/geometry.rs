//! Tropical convexity and the metric geometry of matrix sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::{aggregate, MatrixSet, WeightedMaxNorm};
use crate::maxcore::Tolerance;
use crate::spectral::{frobenius_form, is_irreducible};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullMode {
    /// Max cone: any `α_i >= 0`.
    Span,
    /// Max-convex hull: `max α_i = 1`.
    Conv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub inside: bool,
    /// Present when `inside`; `⊕ α_i x_i` reproduces the target.
    pub coefficients: Option<Vec<f64>>,
    pub mode: HullMode,
}

impl MembershipCertificate {
    /// Re-evaluates `⊕ α_i x_i` and compares with the target.
    pub fn verify<G: AsRef<[f64]>>(&self, target: &[f64], generators: &[G], tol: Tolerance) -> bool {
        let Some(alpha) = &self.coefficients else {
            return !self.inside;
        };
        let combo = combine(generators, alpha);
        let reproduces = combo.iter().zip(target).all(|(a, b)| tol.eq(*a, *b));
        let normalized = match self.mode {
            HullMode::Span => true,
            HullMode::Conv => tol.eq(alpha.iter().copied().fold(0.0, f64::max), 1.0),
        };
        self.inside && reproduces && normalized
    }
}

/// `⊕ α_i g_i`.
pub fn combine<G: AsRef<[f64]>>(generators: &[G], alpha: &[f64]) -> Vec<f64> {
    let len = generators.first().map_or(0, |g| g.as_ref().len());
    let mut out = vec![0.0f64; len];
    for (g, &a) in generators.iter().zip(alpha) {
        for (o, &x) in out.iter_mut().zip(g.as_ref()) {
            *o = o.max(a * x);
        }
    }
    out
}

/// Residuation coefficient `α* = min_{j: g_j > 0} x_j / g_j`, or `None` for a
/// zero generator (unbounded).
fn residual(target: &[f64], g: &[f64]) -> Option<f64> {
    g.iter().zip(target).filter(|(&gj, _)| gj > 0.0).map(|(gj, xj)| xj / gj).reduce(f64::min)
}

/// Decides `target ∈ span⊗(generators)` or `target ∈ conv⊗(generators)` by
/// residuation: the greatest `α` with `⊕ α_i x_i <= target` is computed and
/// tested for equality. Vectors and flattened matrices are both accepted.
pub fn hull_membership<G: AsRef<[f64]>>(
    target: &[f64],
    generators: &[G],
    mode: HullMode,
    tol: Tolerance,
) -> Result<MembershipCertificate> {
    if generators.is_empty() {
        return Err(Error::EmptySet);
    }
    for g in generators {
        if g.as_ref().len() != target.len() {
            return Err(Error::DimensionMismatch { expected: target.len(), found: g.as_ref().len() });
        }
    }
    // Zero generators contribute nothing; in the hull they may carry α = 1.
    let alpha: Vec<f64> = generators
        .iter()
        .map(|g| match (residual(target, g.as_ref()), mode) {
            (Some(a), HullMode::Span) => a,
            (Some(a), HullMode::Conv) => a.min(1.0),
            (None, HullMode::Span) => 0.0,
            (None, HullMode::Conv) => 1.0,
        })
        .collect();
    let combo = combine(generators, &alpha);
    let reproduces = combo.iter().zip(target).all(|(a, b)| tol.eq(*a, *b));
    let normalized = mode == HullMode::Span || tol.eq(alpha.iter().copied().fold(0.0, f64::max), 1.0);
    let inside = reproduces && normalized;
    Ok(MembershipCertificate { inside, coefficients: inside.then_some(alpha), mode })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    pub distance: f64,
    /// Which set holds the member farthest from the other set.
    pub argmax_side: SetSide,
    pub argmax_member: String,
}

/// Hausdorff distance in the matrix norm induced by `‖·‖_∞`. Names and
/// multiplicity are ignored.
pub fn hausdorff(psi: &MatrixSet, phi: &MatrixSet) -> Result<HausdorffReport> {
    if psi.n() != phi.n() {
        return Err(Error::DimensionMismatch { expected: psi.n(), found: phi.n() });
    }
    let directed = |from: &MatrixSet, to: &MatrixSet| -> (f64, String) {
        from.members()
            .iter()
            .map(|(name, a)| {
                let d = to.matrices().map(|b| a.dist_inf(b).expect("dimension checked")).fold(f64::INFINITY, f64::min);
                (d, name.clone())
            })
            .fold((f64::NEG_INFINITY, String::new()), |acc, x| if x.0 > acc.0 { x } else { acc })
    };
    let (dl, nl) = directed(psi, phi);
    let (dr, nr) = directed(phi, psi);
    Ok(if dr > dl {
        HausdorffReport { distance: dr, argmax_side: SetSide::Right, argmax_member: nr }
    } else {
        HausdorffReport { distance: dl, argmax_side: SetSide::Left, argmax_member: nl }
    })
}

/// Eccentricity of a weighted max norm relative to `‖·‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EccentricityValue(pub f64);

/// `max v / min v`: the norm peaks on the unit sphere at the all-ones vector
/// and bottoms out at the unit vector of the smallest weight.
pub fn eccentricity(nu: &WeightedMaxNorm) -> EccentricityValue {
    let v = nu.weights();
    EccentricityValue(v.max_entry() / v.min_entry())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub dominated: bool,
    /// `1 / max(s1_ij / s2_ij)` when dominated; `λ S(Ψ1) <= S(Ψ2)`.
    pub lambda: Option<f64>,
    /// `max_{s1_ij > 0} s1_ij / s2_ij`, infinite if `S(Ψ2)` has a zero there.
    pub ratio: f64,
}

/// Sufficient test for `μ(Ψ1) < μ(Ψ2)`: some `λ > 1` with `λ S(Ψ1) <= S(Ψ2)`.
pub fn strict_dominance(psi1: &MatrixSet, psi2: &MatrixSet) -> Result<Dominance> {
    if psi1.n() != psi2.n() {
        return Err(Error::DimensionMismatch { expected: psi2.n(), found: psi1.n() });
    }
    let s1 = aggregate(psi1);
    let s2 = aggregate(psi2);
    if !is_irreducible(&s2) {
        return Err(Error::Reducible { form: Box::new(frobenius_form(&s2)) });
    }
    if s2.max_entry() == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    let ratio = s1
        .as_slice()
        .iter()
        .zip(s2.as_slice())
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a / b } else { f64::INFINITY })
        .fold(0.0, f64::max);
    let dominated = ratio < 1.0;
    Ok(Dominance { dominated, lambda: dominated.then(|| 1.0 / ratio), ratio })
}
