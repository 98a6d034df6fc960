//! Empirical probes of the continuity of μ and of the joint spectral radius.
//!
//! A probe samples pairs of perturbations of a centre point and records the
//! largest quotient `|f(X) - f(Y)| / d(X, Y)^α`. Distances are measured in
//! the matrix norm induced by `‖·‖_∞` (Hausdorff distance for sets).
//! Perturbed entries are clamped at zero and the clamps are counted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{eccentricity, hausdorff, EccentricityValue};
use crate::jsr::{barabanov_norm, jsr, MatrixSet};
use crate::maxcore::{MaxMatrix, Tolerance};
use crate::spectral;

/// Default number of sampled pairs.
pub const DEFAULT_PAIRS: usize = 2048;

/// The pair that realised the largest quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeWitness {
    Matrices { x: MaxMatrix, y: MaxMatrix },
    Sets { x: MatrixSet, y: MatrixSet },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProbe {
    pub pairs: usize,
    /// Pairs at zero distance are skipped.
    pub skipped: usize,
    /// Entries pushed back to zero by clamping.
    pub clamped: usize,
    pub max_ratio: f64,
    pub alpha: f64,
    pub radius: f64,
    pub seed: u64,
    pub witness: Option<ProbeWitness>,
}

fn check_params(radius: f64, alpha: f64) -> Result<()> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be finite and >= 0")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("exponent {alpha} must be positive")));
    }
    Ok(())
}

/// Uniform entrywise perturbation in `[-h, h]`, clamped at zero.
fn perturb(a: &MaxMatrix, h: f64, rng: &mut impl Rng, clamped: &mut usize) -> MaxMatrix {
    let data = a
        .as_slice()
        .iter()
        .map(|&x| {
            let y = x + h * rng.random_range(-1.0..=1.0);
            if y < 0.0 {
                *clamped += 1;
                0.0
            } else {
                y
            }
        })
        .collect();
    MaxMatrix::new(a.n(), data).expect("finite nonnegative")
}

/// Hölder quotient probe for `μ` around a single matrix. Both members of a
/// pair are drawn independently from the entrywise ball of the given radius.
pub fn probe_matrix_regularity(
    a: &MaxMatrix,
    radius: f64,
    pairs: usize,
    alpha: f64,
    seed: u64,
) -> Result<RegularityProbe> {
    check_params(radius, alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut skipped, mut clamped) = (0, 0);
    let mut max_ratio = 0.0f64;
    let mut witness = None;
    for _ in 0..pairs {
        let x = perturb(a, radius, &mut rng, &mut clamped);
        let y = perturb(a, radius, &mut rng, &mut clamped);
        let d = x.dist_inf(&y)?;
        if d == 0.0 {
            skipped += 1;
            continue;
        }
        let q = (spectral::mu(&x) - spectral::mu(&y)).abs() / d.powf(alpha);
        if q > max_ratio || witness.is_none() {
            max_ratio = max_ratio.max(q);
            witness = Some(ProbeWitness::Matrices { x, y });
        }
    }
    Ok(RegularityProbe { pairs, skipped, clamped, max_ratio, alpha, radius, seed, witness })
}

/// Hölder quotient probe for the joint spectral radius around a set. Each
/// member is perturbed entrywise by at most `radius / n`, so every sampled
/// set lies within Hausdorff distance `radius` of the centre.
pub fn probe_set_regularity(
    psi: &MatrixSet,
    radius: f64,
    pairs: usize,
    alpha: f64,
    seed: u64,
) -> Result<RegularityProbe> {
    check_params(radius, alpha)?;
    let h = radius / psi.n() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut skipped, mut clamped) = (0, 0);
    let mut max_ratio = 0.0f64;
    let mut witness = None;
    for _ in 0..pairs {
        let x = psi.map(|a| perturb(a, h, &mut rng, &mut clamped));
        let y = psi.map(|a| perturb(a, h, &mut rng, &mut clamped));
        let d = hausdorff(&x, &y)?.distance;
        if d == 0.0 {
            skipped += 1;
            continue;
        }
        let q = (jsr(&x) - jsr(&y)).abs() / d.powf(alpha);
        if q > max_ratio || witness.is_none() {
            max_ratio = max_ratio.max(q);
            witness = Some(ProbeWitness::Sets { x, y });
        }
    }
    Ok(RegularityProbe { pairs, skipped, clamped, max_ratio, alpha, radius, seed, witness })
}

/// Member-wise linear interpolation `(1 - t) Ψ + t Φ`, members paired by position.
pub fn interpolate(psi: &MatrixSet, target: &MatrixSet, t: f64) -> Result<MatrixSet> {
    if psi.len() != target.len() {
        return Err(Error::MemberCountMismatch { left: psi.len(), right: target.len() });
    }
    if psi.n() != target.n() {
        return Err(Error::DimensionMismatch { expected: psi.n(), found: target.n() });
    }
    let members = psi
        .members()
        .iter()
        .zip(target.matrices())
        .map(|((name, a), b)| {
            let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| ((1.0 - t) * x + t * y).max(0.0)).collect();
            (name.clone(), MaxMatrix::new(a.n(), data).expect("convex combination"))
        })
        .collect();
    MatrixSet::new(members)
}

/// Eccentricity of the constructed Barabanov norm at `steps + 1` evenly
/// spaced points from `psi` (t = 0) to `target` (t = 1).
pub fn eccentricity_along_sequence(
    psi: &MatrixSet,
    target: &MatrixSet,
    steps: usize,
    tol: Tolerance,
) -> Result<Vec<EccentricityValue>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    (0..=steps)
        .map(|s| {
            let set = interpolate(psi, target, s as f64 / steps as f64)?;
            match barabanov_norm(&set, tol) {
                Ok(nu) => Ok(eccentricity(&nu)),
                Err(Error::Reducible { .. }) => Err(Error::InterpolationReducible { step: s }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
