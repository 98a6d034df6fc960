//! Brute-force reference implementations and random instance generation.
//!
//! Nothing here shares code with the fast paths it checks: cycle means come
//! from explicit enumeration of elementary cycles, products are rebuilt from
//! scratch for every word.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::{MatrixSet, PRODUCT_BUDGET};
use crate::maxcore::MaxMatrix;
use crate::spectral::is_irreducible;

/// Largest dimension accepted by [`bf_cycle_mean`].
pub const ENUMERATION_LIMIT: usize = 9;

/// Attempts before [`generate`] gives up on an irreducible instance.
pub const MAX_RETRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceCycles {
    pub mu: f64,
    /// Every elementary cycle attaining `mu` exactly, each starting at its
    /// smallest node.
    pub attaining: Vec<Vec<usize>>,
}

/// Visits every elementary cycle once, rooted at its smallest node.
pub fn for_each_elementary_cycle(a: &MaxMatrix, mut visit: impl FnMut(&[usize])) {
    let n = a.n();
    fn extend(a: &MaxMatrix, root: usize, path: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        let u = *path.last().unwrap();
        for v in root..a.n() {
            if a.get(u, v) == 0.0 {
                continue;
            }
            if v == root {
                visit(path);
            } else if !used[v] {
                used[v] = true;
                path.push(v);
                extend(a, root, path, used, visit);
                path.pop();
                used[v] = false;
            }
        }
    }
    let mut used = vec![false; n];
    for root in 0..n {
        let mut path = vec![root];
        used[root] = true;
        extend(a, root, &mut path, &mut used, &mut visit);
        used[root] = false;
    }
}

/// `(a_{i1 i2} ··· a_{ik i1})^(1/k)` evaluated as a plain product.
pub fn plain_cycle_mean(a: &MaxMatrix, cycle: &[usize]) -> f64 {
    let k = cycle.len();
    let prod: f64 = (0..k).map(|t| a.get(cycle[t], cycle[(t + 1) % k])).product();
    if k == 1 {
        prod
    } else {
        prod.powf(1.0 / k as f64)
    }
}

/// Maximum cycle geometric mean by exhaustive enumeration.
pub fn bf_cycle_mean(a: &MaxMatrix) -> Result<BruteForceCycles> {
    if a.n() > ENUMERATION_LIMIT {
        return Err(Error::DimensionGuard { n: a.n(), limit: ENUMERATION_LIMIT });
    }
    let mut mu = 0.0f64;
    let mut attaining: Vec<Vec<usize>> = Vec::new();
    for_each_elementary_cycle(a, |c| {
        let g = plain_cycle_mean(a, c);
        if g > mu {
            mu = g;
            attaining.clear();
        }
        if g == mu && g > 0.0 {
            attaining.push(c.to_vec());
        }
    });
    Ok(BruteForceCycles { mu, attaining })
}

/// Truncated generalised spectral radius and Berger–Wang quantities at depth
/// m: `(max μ(B))^(1/m)` and `(max ‖B‖_∞)^(1/m)` over all products of length m.
pub fn bf_gsr_truncation(psi: &MatrixSet, m: u32) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let k = psi.len();
    let required = (k as u128).checked_pow(m).unwrap_or(u128::MAX);
    if required > PRODUCT_BUDGET {
        return Err(Error::BudgetExceeded { required, budget: PRODUCT_BUDGET });
    }
    let mats: Vec<&MaxMatrix> = psi.matrices().collect();
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut word = vec![0usize; m as usize];
    for _ in 0..required {
        let mut b = mats[word[0]].clone();
        for &w in &word[1..] {
            b = naive_mul(&b, mats[w]);
        }
        lo = lo.max(bf_cycle_mean(&b)?.mu);
        hi = hi.max(b.norm_inf());
        for slot in word.iter_mut().rev() {
            *slot += 1;
            if *slot < k {
                break;
            }
            *slot = 0;
        }
    }
    let root = 1.0 / m as f64;
    Ok((lo.powf(root), hi.powf(root)))
}

fn naive_mul(a: &MaxMatrix, b: &MaxMatrix) -> MaxMatrix {
    let n = a.n();
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (0..n).map(|k| a.get(i, k) * b.get(k, j)).fold(0.0, f64::max);
        }
    }
    MaxMatrix::from_rows(&rows).expect("product of valid matrices")
}

/// Parameters for a random matrix set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub set_size: usize,
    /// Probability that an entry is positive.
    pub density: f64,
    /// Positive entries are log-uniform in `[low, high]`.
    pub entry_range: (f64, f64),
    pub seed: u64,
    pub require_irreducible: bool,
}

impl InstanceSpec {
    pub fn new(n: usize, set_size: usize, seed: u64) -> Self {
        InstanceSpec { n, set_size, density: 1.0, entry_range: (0.1, 10.0), seed, require_irreducible: false }
    }

    pub fn density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn entry_range(mut self, low: f64, high: f64) -> Self {
        self.entry_range = (low, high);
        self
    }

    pub fn irreducible(mut self) -> Self {
        self.require_irreducible = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.entry_range;
        if self.n == 0 || self.set_size == 0 {
            return Err(Error::InvalidParameter("dimension and set size must be positive".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidParameter(format!("density {} not in (0, 1]", self.density)));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("entry range ({lo}, {hi}) invalid")));
        }
        Ok(())
    }
}

/// Random matrix: each entry is positive with probability `density`, log-uniform in the range.
pub fn random_matrix(rng: &mut impl Rng, n: usize, density: f64, (lo, hi): (f64, f64)) -> MaxMatrix {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let data = (0..n * n)
        .map(|_| if rng.random_bool(density) { rng.random_range(llo..=lhi).exp().clamp(lo, hi) } else { 0.0 })
        .collect();
    MaxMatrix::new(n, data).expect("positive finite entries")
}

/// Deterministic random matrix set; with `require_irreducible` the draw is
/// repeated until the aggregate is irreducible.
pub fn generate(spec: &InstanceSpec) -> Result<MatrixSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let attempts = if spec.require_irreducible { MAX_RETRIES } else { 1 };
    for _ in 0..attempts {
        let mats: Vec<MaxMatrix> =
            (0..spec.set_size).map(|_| random_matrix(&mut rng, spec.n, spec.density, spec.entry_range)).collect();
        let set = MatrixSet::from_matrices(mats)?;
        if !spec.require_irreducible || is_irreducible(&crate::jsr::aggregate(&set)) {
            return Ok(set);
        }
    }
    Err(Error::RetryExhausted(attempts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let r = bf_cycle_mean(&MaxMatrix::diagonal(&[0.5, 4.0, 2.0]).unwrap()).unwrap();
        assert_eq!(r.mu, 4.0);
        assert_eq!(r.attaining, vec![vec![1]]);
    }

    #[test]
    fn two_by_two() {
        let r = bf_cycle_mean(&MaxMatrix::from_rows(&[[2.0, 3.0], [4.0, 5.0]]).unwrap()).unwrap();
        assert_eq!(r.mu, 5.0);
        let mut count = 0;
        for_each_elementary_cycle(&MaxMatrix::ones(2), |_| count += 1);
        assert_eq!(count, 3);
    }

    #[test]
    fn full_three_by_three_has_eight_cycles() {
        let mut cycles = Vec::new();
        for_each_elementary_cycle(&MaxMatrix::ones(3), |c| cycles.push(c.to_vec()));
        assert_eq!(cycles.len(), 8);
        let s = MaxMatrix::from_rows(&[[1.0 / 3.0, 0.5, 1.0], [0.75, 0.8, 10.0 / 3.0], [0.6, 0.2, 0.25]]).unwrap();
        let r = bf_cycle_mean(&s).unwrap();
        assert!((r.mu - 1.0).abs() < 1e-15);
        assert_eq!(r.attaining, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn guard() {
        assert!(matches!(bf_cycle_mean(&MaxMatrix::ones(10)), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn gsr_singleton_and_zero() {
        let a = MaxMatrix::from_rows(&[[0.5, 2.0], [1.0, 0.1]]).unwrap();
        let psi = MatrixSet::singleton(a.clone());
        for m in 1..4 {
            let (lo, hi) = bf_gsr_truncation(&psi, m).unwrap();
            let mu = bf_cycle_mean(&a).unwrap().mu;
            assert!((lo - mu).abs() < 1e-12);
            assert!((hi - a.max_power(m).norm_inf().powf(1.0 / m as f64)).abs() < 1e-12);
        }
        let z = MatrixSet::singleton(MaxMatrix::zeros(3));
        assert_eq!(bf_gsr_truncation(&z, 2).unwrap(), (0.0, 0.0));
        let big = MatrixSet::from_matrices(vec![MaxMatrix::ones(2); 10]).unwrap();
        assert!(matches!(bf_gsr_truncation(&big, 7), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec::new(4, 3, 42).density(0.4);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = InstanceSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn full_density_is_irreducible() {
        for seed in 0..20 {
            let set = generate(&InstanceSpec::new(5, 2, seed)).unwrap();
            assert!(is_irreducible(&crate::jsr::aggregate(&set)));
        }
    }

    #[test]
    fn sparse_sets_are_valid() {
        for seed in 0..100 {
            let spec = InstanceSpec::new(5, 3, seed).density(0.3);
            let set = generate(&spec).unwrap();
            assert_eq!(set.len(), 3);
            assert!(set
                .matrices()
                .all(|a| a.n() == 5 && a.as_slice().iter().all(|&x| x == 0.0 || (0.1..=10.0).contains(&x))));
            let irr = generate(&spec.clone().irreducible()).unwrap();
            assert!(is_irreducible(&crate::jsr::aggregate(&irr)));
        }
    }

    #[test]
    fn bad_specs() {
        assert!(generate(&InstanceSpec::new(3, 1, 0).density(0.0)).is_err());
        assert!(generate(&InstanceSpec::new(3, 1, 0).entry_range(0.0, 1.0)).is_err());
        assert!(generate(&InstanceSpec::new(0, 1, 0)).is_err());
    }
}
