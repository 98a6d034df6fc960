//! Joint spectral radius of finite matrix sets in the max algebra.
//!
//! The radius of a set Ψ equals μ of its entrywise maximum `S(Ψ)`. On top of
//! that identity this module builds weighted max norms `ν(x) = max_i v_i |x_i|`,
//! the Barabanov norm given by a left eigenvector of `S(Ψ)`, depth-m product
//! bounds, the reducible-case obstruction and finiteness certificates.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxcore::{MaxMatrix, MaxVector, Tolerance};
use crate::spectral::{self, frobenius_form, is_irreducible, principal_eigenpair, FrobeniusForm, Side};

/// Default cap on `|Ψ|^m` for product enumeration.
pub const PRODUCT_BUDGET: u128 = 1_000_000;

/// Default number of random vectors drawn by [`verify_barabanov`].
pub const DEFAULT_SAMPLES: usize = 256;

/// A nonempty, finite, named collection of same-dimension matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct MatrixSet {
    n: usize,
    members: Vec<(String, MaxMatrix)>,
}

#[derive(Deserialize)]
struct RawSet {
    n: usize,
    members: Vec<(String, MaxMatrix)>,
}

impl TryFrom<RawSet> for MatrixSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        let set = MatrixSet::new(raw.members)?;
        if set.n != raw.n {
            return Err(Error::DimensionMismatch { expected: raw.n, found: set.n });
        }
        Ok(set)
    }
}

impl MatrixSet {
    pub fn new(members: Vec<(String, MaxMatrix)>) -> Result<Self> {
        let n = members.first().ok_or(Error::EmptySet)?.1.n();
        let mut names = HashSet::new();
        for (name, a) in &members {
            if a.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.n() });
            }
            if !names.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(MatrixSet { n, members })
    }

    /// Names the members `A1, A2, ...`.
    pub fn from_matrices(mats: Vec<MaxMatrix>) -> Result<Self> {
        Self::new(mats.into_iter().enumerate().map(|(i, a)| (format!("A{}", i + 1), a)).collect())
    }

    pub fn singleton(a: MaxMatrix) -> Self {
        MatrixSet { n: a.n(), members: vec![("A1".into(), a)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn members(&self) -> &[(String, MaxMatrix)] {
        &self.members
    }

    pub fn matrices(&self) -> impl Iterator<Item = &MaxMatrix> {
        self.members.iter().map(|(_, a)| a)
    }

    pub fn get(&self, name: &str) -> Option<&MaxMatrix> {
        self.members.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    /// Applies `f` to every member, keeping names.
    pub fn map(&self, mut f: impl FnMut(&MaxMatrix) -> MaxMatrix) -> MatrixSet {
        MatrixSet { n: self.n, members: self.members.iter().map(|(s, a)| (s.clone(), f(a))).collect() }
    }

    pub fn scale(&self, c: f64) -> MatrixSet {
        self.map(|a| a.scale(c))
    }

    /// Adds a member, rejecting duplicate names and wrong dimensions.
    pub fn with_member(&self, name: impl Into<String>, a: MaxMatrix) -> Result<MatrixSet> {
        let mut members = self.members.clone();
        members.push((name.into(), a));
        MatrixSet::new(members)
    }

    /// Restriction of every member to a principal submatrix.
    pub fn restrict(&self, idx: &[usize]) -> MatrixSet {
        self.map(|a| a.submatrix(idx))
    }
}

/// `ν(x) = max_i v_i |x_i|` with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMaxNorm {
    v: MaxVector,
}

impl WeightedMaxNorm {
    pub fn new(v: MaxVector) -> Result<Self> {
        if let Some((index, &value)) = v.as_slice().iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(WeightedMaxNorm { v })
    }

    /// The unweighted ∞-norm.
    pub fn uniform(n: usize) -> Self {
        WeightedMaxNorm { v: MaxVector::ones(n) }
    }

    pub fn weights(&self) -> &MaxVector {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.v.as_slice().iter().zip(x).map(|(v, x)| v * x.abs()).fold(0.0, f64::max)
    }
}

/// `S(Ψ)`: entrywise maximum over members.
pub fn aggregate(psi: &MatrixSet) -> MaxMatrix {
    let mut it = psi.matrices();
    let first = it.next().expect("nonempty").clone();
    it.fold(first, |s, a| s.max_add(a).expect("uniform dimension"))
}

/// Joint spectral radius `μ(Ψ) = μ(S(Ψ))`.
pub fn jsr(psi: &MatrixSet) -> f64 {
    spectral::mu(&aggregate(psi))
}

/// Operator norm of `A` induced by `ν`: `max_{a_ij > 0} v_i a_ij / v_j`.
pub fn induced_norm(a: &MaxMatrix, nu: &WeightedMaxNorm) -> Result<f64> {
    if a.n() != nu.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: nu.n() });
    }
    let v = nu.weights().as_slice();
    let mut best = 0.0f64;
    for (i, row) in a.rows().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x > 0.0 {
                best = best.max(v[i] * x / v[j]);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsrBounds {
    pub m: u32,
    /// `max μ(B)^(1/m)` over products of length m.
    pub lower: f64,
    /// `max η_ν(B)^(1/m)` over products of length m.
    pub upper: f64,
    /// Member indices of a product attaining `lower`, multiplied left to right.
    pub lower_word: Vec<usize>,
    /// Same for `upper`.
    pub upper_word: Vec<usize>,
}

pub(crate) fn check_budget(members: usize, m: u32, budget: u128) -> Result<u128> {
    let required = (members as u128).checked_pow(m).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required)
}

/// Calls `visit` on every product `A_{i_1} ⊗ ··· ⊗ A_{i_m}` (index order
/// lexicographic), sharing prefixes.
pub fn for_each_product(
    psi: &MatrixSet,
    m: u32,
    budget: u128,
    mut visit: impl FnMut(&[usize], &MaxMatrix),
) -> Result<()> {
    check_budget(psi.len(), m, budget)?;
    let mats: Vec<&MaxMatrix> = psi.matrices().collect();
    let mut word = Vec::with_capacity(m as usize);
    fn rec(
        mats: &[&MaxMatrix],
        m: usize,
        prefix: &MaxMatrix,
        word: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], &MaxMatrix),
    ) {
        if word.len() == m {
            visit(word, prefix);
            return;
        }
        for (i, a) in mats.iter().enumerate() {
            let next = prefix.max_mul(a).expect("uniform dimension");
            word.push(i);
            rec(mats, m, &next, word, visit);
            word.pop();
        }
    }
    rec(&mats, m as usize, &MaxMatrix::identity(psi.n()), &mut word, &mut visit);
    Ok(())
}

/// Depth-m sandwich `lower <= μ(Ψ) <= upper`.
pub fn jsr_bounds(psi: &MatrixSet, m: u32, nu: &WeightedMaxNorm) -> Result<JsrBounds> {
    jsr_bounds_with_budget(psi, m, nu, PRODUCT_BUDGET)
}

pub fn jsr_bounds_with_budget(psi: &MatrixSet, m: u32, nu: &WeightedMaxNorm, budget: u128) -> Result<JsrBounds> {
    if m == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if nu.n() != psi.n() {
        return Err(Error::DimensionMismatch { expected: psi.n(), found: nu.n() });
    }
    let (mut lo, mut hi) = (-1.0f64, -1.0f64);
    let (mut lower_word, mut upper_word) = (Vec::new(), Vec::new());
    for_each_product(psi, m, budget, |word, b| {
        let (l, h) = (spectral::mu(b), induced_norm(b, nu).expect("dimension checked"));
        if l > lo {
            lo = l;
            lower_word = word.to_vec();
        }
        if h > hi {
            hi = h;
            upper_word = word.to_vec();
        }
    })?;
    let root = 1.0 / m as f64;
    Ok(JsrBounds { m, lower: lo.powf(root), upper: hi.powf(root), lower_word, upper_word })
}

/// Barabanov norm from the left principal eigenvector of `S(Ψ)`.
pub fn barabanov_norm(psi: &MatrixSet, tol: Tolerance) -> Result<WeightedMaxNorm> {
    let s = aggregate(psi);
    let pair = principal_eigenpair(&s, Side::Left, tol)?;
    WeightedMaxNorm::new(pair.vector)
}

/// Outcome of a norm check; a failure carries an offending vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub holds: bool,
    /// The level ν is checked against (μ(Ψ) unless given explicitly).
    pub level: f64,
    pub counterexample: Option<Vec<f64>>,
}

impl NormCheck {
    fn pass(level: f64) -> Self {
        NormCheck { holds: true, level, counterexample: None }
    }

    fn fail(level: f64, x: Vec<f64>) -> Self {
        NormCheck { holds: false, level, counterexample: Some(x) }
    }
}

/// Extremality: `η_ν(A) <= μ(Ψ)` for every member.
pub fn verify_extremal(psi: &MatrixSet, nu: &WeightedMaxNorm, tol: Tolerance) -> Result<NormCheck> {
    let level = jsr(psi);
    let v = nu.weights().as_slice();
    for a in psi.matrices() {
        if nu.n() != a.n() {
            return Err(Error::DimensionMismatch { expected: a.n(), found: nu.n() });
        }
        for (i, row) in a.rows().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x > 0.0 && !tol.le(v[i] * x, level * v[j]) {
                    // ν(A e_j) >= v_i a_ij > μ v_j = μ ν(e_j)
                    return Ok(NormCheck::fail(level, MaxVector::unit(a.n(), j).into_vec()));
                }
            }
        }
    }
    Ok(NormCheck::pass(level))
}

/// Barabanov property at level μ(Ψ); see [`verify_barabanov_at_level`].
pub fn verify_barabanov(
    psi: &MatrixSet,
    nu: &WeightedMaxNorm,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<NormCheck> {
    verify_barabanov_at_level(psi, nu, jsr(psi), samples, seed, tol)
}

/// Checks `max_{A∈Ψ} ν(A ⊗ x) = level · ν(x)`.
///
/// The closed form `max_i v_i s_ij = level · v_j` on `S(Ψ)` decides the
/// question; additionally `samples` random positive vectors with log-uniform
/// entries in `[1e-3, 1e3]` are evaluated directly.
pub fn verify_barabanov_at_level(
    psi: &MatrixSet,
    nu: &WeightedMaxNorm,
    level: f64,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<NormCheck> {
    let n = psi.n();
    if nu.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: nu.n() });
    }
    let s = aggregate(psi);
    let lhs = s.left_apply(nu.weights())?;
    for j in 0..n {
        if !tol.eq(lhs[j], level * nu.weights()[j]) {
            return Ok(NormCheck::fail(level, MaxVector::unit(n, j).into_vec()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = 10f64.powf(rng.random_range(-3.0..=3.0));
        }
        let xv = MaxVector::from_vec_unchecked(x.clone());
        let target = level * nu.eval(&x);
        let best =
            psi.matrices().map(|a| nu.eval(a.apply(&xv).expect("dimension checked").as_slice())).fold(0.0, f64::max);
        if !tol.eq(best, target) {
            return Ok(NormCheck::fail(level, x));
        }
    }
    Ok(NormCheck::pass(level))
}

/// Evidence that no Barabanov norm exists: a nonzero `x >= 0` with
/// `S ⊗ x = λ x` for some `λ < μ(S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceWitness {
    /// Index of the slow class in the Frobenius form.
    pub class: usize,
    pub class_nodes: Vec<usize>,
    pub eigenvalue: f64,
    pub vector: MaxVector,
    pub form: FrobeniusForm,
}

/// Finds a class `i` with `μ(A_ii) < μ(S)` that is not accessed by any class
/// of different block μ; such a class carries an eigenvector of `S` at the
/// smaller eigenvalue, which rules out a Barabanov norm.
pub fn barabanov_nonexistence(psi: &MatrixSet, tol: Tolerance) -> Result<Option<NonexistenceWitness>> {
    let s = aggregate(psi);
    let form = frobenius_form(&s);
    let top = form.max_block_mu();
    let p = form.classes.len();
    for i in 0..p {
        let lam = form.block_mus[i];
        if lam >= top || tol.eq(lam, top) {
            continue;
        }
        let blocked = (0..p).any(|j| j != i && form.has_access(j, i) && !tol.eq(form.block_mus[j], lam));
        if blocked {
            continue;
        }
        let vector = class_eigenvector(&s, &form, i, tol)?;
        return Ok(Some(NonexistenceWitness {
            class: i,
            class_nodes: form.classes[i].clone(),
            eigenvalue: lam,
            vector,
            form,
        }));
    }
    Ok(None)
}

/// Eigenvector of `S` for `μ(A_ii)`, supported on the nodes that reach class `i`.
fn class_eigenvector(s: &MaxMatrix, form: &FrobeniusForm, i: usize, tol: Tolerance) -> Result<MaxVector> {
    let n = s.n();
    let lam = form.block_mus[i];
    let upstream: Vec<usize> = (0..form.classes.len())
        .filter(|&j| j == i || form.has_access(j, i))
        .flat_map(|j| form.classes[j].iter().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let sub = s.submatrix(&upstream);
    let mut x = vec![0.0; n];
    if lam == 0.0 {
        // Acyclic upstream part: a node with no incoming edge has a zero column.
        let src = (0..upstream.len())
            .find(|&c| (0..upstream.len()).all(|r| sub.get(r, c) == 0.0))
            .ok_or_else(|| Error::ToleranceFailure("no source node in acyclic class".into()))?;
        x[upstream[src]] = 1.0;
        return Ok(MaxVector::from_vec_unchecked(x));
    }
    let (star, critical) = spectral::star_column(&sub, lam, tol)?;
    let c = critical
        .into_iter()
        .find(|&c| form.classes[i].contains(&upstream[c]))
        .ok_or_else(|| Error::ToleranceFailure("class has no critical node".into()))?;
    for (r, &node) in upstream.iter().enumerate() {
        x[node] = star.get(r, c);
    }
    Ok(MaxVector::from_vec_unchecked(x).normalized())
}

/// A product of length `k <= n` attaining the joint spectral radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitenessCertificate {
    /// Regions `(ℓ_1, ..., ℓ_k)` of the norm's unit sphere visited in turn.
    pub region_cycle: Vec<usize>,
    /// `A_1, ..., A_k`, where `A_t` maps region `ℓ_t` into `ℓ_{t+1}`.
    pub matrix_names: Vec<String>,
    /// `A_k ⊗ ··· ⊗ A_1`.
    pub product: MaxMatrix,
    pub k: usize,
    /// μ(Ψ) at the time of certification.
    pub jsr: f64,
}

/// Extracts a product of at most `n` members whose cycle mean is `μ(Ψ)^k`.
pub fn finiteness_product(psi: &MatrixSet, tol: Tolerance) -> Result<FinitenessCertificate> {
    let mu = jsr(psi);
    if mu == 0.0 {
        return Err(Error::NothingToCertify);
    }
    let s = aggregate(psi);
    let (region_cycle, picks) = if is_irreducible(&s) {
        region_cycle(psi, mu, tol)?
    } else {
        let form = frobenius_form(&s);
        let block = form
            .block_mus
            .iter()
            .position(|&b| tol.eq(b, mu))
            .ok_or_else(|| Error::ToleranceFailure("no diagonal block attains μ(S)".into()))?;
        let nodes = &form.classes[block];
        let (cycle, picks) = region_cycle(&psi.restrict(nodes), mu, tol)?;
        (cycle.into_iter().map(|r| nodes[r]).collect(), picks)
    };

    let members = psi.members();
    let mut product = MaxMatrix::identity(psi.n());
    for &p in &picks {
        product = members[p].1.max_mul(&product)?;
    }
    let k = picks.len();
    let got = spectral::mu(&product);
    if !tol.rel_eq(got, mu.powi(k as i32)) {
        return Err(Error::ToleranceFailure(format!("μ(product) = {got}, expected {}", mu.powi(k as i32))));
    }
    Ok(FinitenessCertificate {
        region_cycle,
        matrix_names: picks.iter().map(|&p| members[p].0.clone()).collect(),
        product,
        k,
        jsr: mu,
    })
}

/// Region graph walk for a set whose aggregate is irreducible. Returns the
/// region cycle and, per step, the index of the member used.
fn region_cycle(psi: &MatrixSet, mu: f64, tol: Tolerance) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = psi.n();
    let v = barabanov_norm(psi, tol)?;
    let v = v.weights().as_slice();
    // Edge i -> l when some member has v_l a_li = μ v_i; first member wins.
    let step = |i: usize| -> Option<(usize, usize)> {
        (0..n).find_map(|l| {
            psi.matrices().position(|a| a.get(l, i) > 0.0 && tol.rel_eq(v[l] * a.get(l, i), mu * v[i])).map(|p| (l, p))
        })
    };
    let mut seen = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut picks = Vec::new();
    let mut node = 0;
    while seen[node] == usize::MAX {
        seen[node] = path.len();
        path.push(node);
        let (next, p) = step(node).ok_or_else(|| Error::ToleranceFailure(format!("region {node} has no successor")))?;
        picks.push(p);
        node = next;
    }
    let start = seen[node];
    Ok((path[start..].to_vec(), picks[start..].to_vec()))
}

/// Adjoins `trials` random max-convex combinations `⊕ α_i A_i` (with
/// `max α_i = 1`) and checks the joint spectral radius does not move.
pub fn conv_invariance_check(psi: &MatrixSet, trials: usize, seed: u64, tol: Tolerance) -> bool {
    let base = jsr(psi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extended = psi.clone();
    for t in 0..trials {
        let mut alpha: Vec<f64> = (0..psi.len()).map(|_| rng.random_range(0.0..=1.0)).collect();
        alpha[rng.random_range(0..psi.len())] = 1.0;
        let combo = max_combination(psi, &alpha);
        extended = extended.with_member(format!("__conv{t}"), combo).expect("fresh name");
        if !tol.eq(jsr(&extended), base) {
            return false;
        }
    }
    true
}

/// `⊕ α_i A_i`.
pub fn max_combination(psi: &MatrixSet, alpha: &[f64]) -> MaxMatrix {
    psi.matrices()
        .zip(alpha)
        .map(|(a, &c)| a.scale(c))
        .reduce(|x, y| x.max_add(&y).expect("uniform dimension"))
        .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> MaxMatrix {
        MaxMatrix::from_rows(rows).unwrap()
    }

    fn example_set() -> MatrixSet {
        MatrixSet::from_matrices(vec![
            m(&[&[1.0 / 3.0, 0.5, 1.0], &[0.75, 2.0 / 3.0, 0.2], &[0.6, 0.2, 0.0]]),
            m(&[&[0.0, 0.25, 0.5], &[0.0, 0.8, 10.0 / 3.0], &[0.25, 0.0, 0.25]]),
        ])
        .unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn example_norm() -> WeightedMaxNorm {
        WeightedMaxNorm::new(MaxVector::new(vec![1.0, 0.5, 5.0 / 3.0]).unwrap()).unwrap()
    }

    #[test]
    fn set_validation() {
        assert!(matches!(MatrixSet::new(vec![]), Err(Error::EmptySet)));
        let a = MaxMatrix::identity(2);
        assert!(matches!(
            MatrixSet::new(vec![("X".into(), a.clone()), ("X".into(), a.clone())]),
            Err(Error::DuplicateName(_))
        ));
        assert!(MatrixSet::new(vec![("X".into(), a), ("Y".into(), MaxMatrix::identity(3))]).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let a = example_set().members()[0].1.clone();
        assert_eq!(aggregate(&MatrixSet::singleton(a.clone())), a);
        assert_eq!(aggregate(&MatrixSet::from_matrices(vec![a.clone(), a.clone()]).unwrap()), a);
        assert_eq!(
            aggregate(&example_set()),
            m(&[&[1.0 / 3.0, 0.5, 1.0], &[0.75, 0.8, 10.0 / 3.0], &[0.6, 0.2, 0.25]])
        );
    }

    #[test]
    fn jsr_examples() {
        assert!((jsr(&example_set()) - 1.0).abs() < 1e-15);
        assert_eq!(jsr(&MatrixSet::singleton(MaxMatrix::identity(3).scale(2.5))), 2.5);
    }

    #[test]
    fn induced_norm_examples() {
        let a = m(&[&[0.1, 3.0], &[0.5, 2.0]]);
        assert_eq!(induced_norm(&a, &WeightedMaxNorm::uniform(2)).unwrap(), 3.0);
        let s = aggregate(&example_set());
        assert!((induced_norm(&s, &example_norm()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(induced_norm(&MaxMatrix::identity(3), &example_norm()).unwrap(), 1.0);
        assert_eq!(induced_norm(&MaxMatrix::zeros(3), &example_norm()).unwrap(), 0.0);
    }

    #[test]
    fn induced_norm_is_attained_supremum() {
        // η_ν(A) = max over x > 0 of ν(A⊗x)/ν(x); the closed form is attained.
        let s = aggregate(&example_set());
        let nu = example_norm();
        let eta = induced_norm(&s, &WeightedMaxNorm::uniform(3)).unwrap();
        let x = MaxVector::ones(3);
        let ratio = s.apply(&x).unwrap().max_entry();
        assert_eq!(eta, ratio);
        for x in [vec![1.0, 2.0, 0.3], vec![0.2, 0.1, 5.0]] {
            let xv = MaxVector::new(x.clone()).unwrap();
            let r = nu.eval(s.apply(&xv).unwrap().as_slice()) / nu.eval(&x);
            assert!(r <= induced_norm(&s, &nu).unwrap() + 1e-15);
        }
    }

    #[test]
    fn bounds_examples() {
        let psi = example_set();
        let b = jsr_bounds(&psi, 1, &example_norm()).unwrap();
        let expected_lo = psi.matrices().map(spectral::mu).fold(0.0, f64::max);
        assert!((b.lower - expected_lo).abs() < 1e-15);
        assert!((b.upper - 1.0).abs() < 1e-15);
        assert!(b.lower <= 1.0 && 1.0 <= b.upper + 1e-15);

        let z = MatrixSet::singleton(MaxMatrix::zeros(2));
        let b = jsr_bounds(&z, 3, &WeightedMaxNorm::uniform(2)).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn singleton_bounds_collapse_with_eigen_norm() {
        let a = m(&[&[0.5, 2.0], &[1.5, 0.25]]);
        let psi = MatrixSet::singleton(a.clone());
        let nu = barabanov_norm(&psi, tol()).unwrap();
        for depth in 1..=4 {
            let b = jsr_bounds(&psi, depth, &nu).unwrap();
            assert!((b.lower - spectral::mu(&a)).abs() < 1e-12);
            assert!((b.upper - b.lower).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_budget() {
        let err = jsr_bounds_with_budget(&example_set(), 5, &example_norm(), 16).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 32, budget: 16 }));
        assert!(jsr_bounds(&example_set(), 0, &example_norm()).is_err());
    }

    #[test]
    fn barabanov_examples() {
        let nu = barabanov_norm(&example_set(), tol()).unwrap();
        let expected = [0.6, 0.3, 1.0];
        for (a, b) in nu.weights().as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let nu = barabanov_norm(&MatrixSet::singleton(MaxMatrix::ones(3)), tol()).unwrap();
        assert_eq!(nu.weights().as_slice(), &[1.0, 1.0, 1.0]);
        let err = barabanov_norm(&MatrixSet::singleton(m(&[&[2.0, 0.0], &[1.0, 1.0]])), tol()).unwrap_err();
        assert!(matches!(err, Error::Reducible { .. }));
    }

    #[test]
    fn verification_examples() {
        let psi = example_set();
        let nu = example_norm();
        assert!(verify_extremal(&psi, &nu, tol()).unwrap().holds);
        assert!(verify_barabanov(&psi, &nu, DEFAULT_SAMPLES, 7, tol()).unwrap().holds);

        let bad = verify_extremal(&psi, &WeightedMaxNorm::uniform(3), tol()).unwrap();
        assert!(!bad.holds);
        let x = bad.counterexample.unwrap();
        let xv = MaxVector::new(x.clone()).unwrap();
        let worst = psi.matrices().map(|a| a.apply(&xv).unwrap().max_entry()).fold(0.0, f64::max);
        assert!(worst > bad.level * x.iter().copied().fold(0.0, f64::max));

        let single = MatrixSet::singleton(m(&[&[0.2, 3.0, 0.0], &[0.0, 0.1, 1.0], &[0.5, 0.0, 0.4]]));
        let nu = barabanov_norm(&single, tol()).unwrap();
        assert!(verify_extremal(&single, &nu, tol()).unwrap().holds);
        assert!(verify_barabanov(&single, &nu, DEFAULT_SAMPLES, 1, tol()).unwrap().holds);
    }

    #[test]
    fn wrong_level_is_rejected() {
        let psi = example_set();
        let check = verify_barabanov_at_level(&psi, &example_norm(), 1.01, 16, 0, tol()).unwrap();
        assert!(!check.holds);
    }

    #[test]
    fn nonexistence_examples() {
        let w = barabanov_nonexistence(&MatrixSet::singleton(m(&[&[2.0, 0.0], &[1.0, 1.0]])), tol())
            .unwrap()
            .expect("obstruction");
        assert_eq!(w.vector.as_slice(), &[0.0, 1.0]);
        assert_eq!(w.eigenvalue, 1.0);
        assert!(barabanov_nonexistence(&example_set(), tol()).unwrap().is_none());
        assert!(barabanov_nonexistence(&MatrixSet::singleton(m(&[&[1.0, 0.0], &[1.0, 2.0]])), tol())
            .unwrap()
            .is_none());
    }

    #[test]
    fn nonexistence_with_acyclic_slow_class() {
        // Node 2 has no loop and nothing flows into it; node 0-1 is a fast cycle.
        let s = m(&[&[0.0, 2.0, 0.0], &[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let w = barabanov_nonexistence(&MatrixSet::singleton(s.clone()), tol()).unwrap().expect("obstruction");
        assert_eq!(w.eigenvalue, 0.0);
        let sx = s.apply(&w.vector).unwrap();
        assert_eq!(sx.as_slice(), &[0.0, 0.0, 0.0]);
        assert!(w.vector.max_entry() > 0.0);
    }

    #[test]
    fn finiteness_on_example_example() {
        let cert = finiteness_product(&example_set(), tol()).unwrap();
        assert_eq!(cert.k, 3);
        assert_eq!(cert.matrix_names, vec!["A1", "A2", "A1"]);
        assert_eq!(cert.region_cycle, vec![0, 2, 1]);
        assert!((spectral::mu(&cert.product) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finiteness_examples() {
        let cert = finiteness_product(&MatrixSet::singleton(MaxMatrix::identity(3).scale(2.0)), tol()).unwrap();
        assert_eq!(cert.k, 1);
        assert_eq!(cert.product, MaxMatrix::identity(3).scale(2.0));

        let a = m(&[&[0.0, 2.0], &[0.5, 0.0]]);
        let cert = finiteness_product(&MatrixSet::singleton(a.clone()), tol()).unwrap();
        assert_eq!(cert.k, 2);
        assert_eq!(cert.product, a.max_power(2));

        assert!(matches!(
            finiteness_product(&MatrixSet::singleton(MaxMatrix::zeros(2)), tol()),
            Err(Error::NothingToCertify)
        ));
    }

    #[test]
    fn finiteness_on_reducible_set() {
        let psi = MatrixSet::from_matrices(vec![
            m(&[&[0.5, 0.0, 0.0], &[1.0, 0.0, 3.0], &[0.0, 2.0, 0.0]]),
            m(&[&[0.2, 0.0, 0.0], &[0.0, 1.0, 0.0], &[4.0, 0.0, 0.0]]),
        ])
        .unwrap();
        let cert = finiteness_product(&psi, tol()).unwrap();
        assert!(cert.k <= 3);
        let mu = jsr(&psi);
        assert!((spectral::mu(&cert.product) - mu.powi(cert.k as i32)).abs() < 1e-12);
        assert!(cert.region_cycle.iter().all(|&r| r == 1 || r == 2));
    }

    #[test]
    fn conv_invariance_examples() {
        let psi = example_set();
        assert!(conv_invariance_check(&psi, 50, 3, tol()));
        let combo = max_combination(&psi, &[1.0, 0.3]);
        let ext = psi.with_member("C", combo).unwrap();
        assert!((jsr(&ext) - 1.0).abs() < 1e-15);
        let s = max_combination(&psi, &[1.0, 1.0]);
        assert_eq!(s, aggregate(&psi));
    }
}
