//! Spectral quantities of a single nonnegative matrix: the maximal cycle
//! geometric mean μ(A), critical cycles, irreducibility, principal max
//! eigenvectors, the Frobenius normal form and the gradient of μ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxcore::{MaxMatrix, MaxVector, Tolerance};

/// Largest dimension for which critical-cycle uniqueness is decided.
pub const UNIQUENESS_LIMIT: usize = 12;

/// How many elementary cycles attain μ(A), up to rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalCycles {
    /// No cycle at all; μ(A) = 0.
    Acyclic,
    Unique,
    Multiple,
    /// Dimension above [`UNIQUENESS_LIMIT`].
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleMeanResult {
    pub mu: f64,
    /// Distinct nodes `(i_1, ..., i_k)` of a cycle attaining `mu`, starting at
    /// its smallest index. Empty when `mu == 0`.
    pub witness_cycle: Vec<usize>,
    pub critical: CriticalCycles,
}

impl CycleMeanResult {
    pub fn unique_critical(&self) -> bool {
        self.critical == CriticalCycles::Unique
    }
}

/// Geometric mean of the edge weights along `cycle` (closing edge included).
///
/// Weights are combined in sorted order so that the value depends only on
/// the multiset of weights, not on where the cycle starts or its direction.
pub fn cycle_geometric_mean(a: &MaxMatrix, cycle: &[usize]) -> f64 {
    let k = cycle.len();
    if k == 0 {
        return 0.0;
    }
    let mut w: Vec<f64> = (0..k).map(|t| a.get(cycle[t], cycle[(t + 1) % k])).collect();
    if k == 1 {
        return w[0];
    }
    w.sort_by(f64::total_cmp);
    let prod: f64 = w.iter().product();
    if prod.is_normal() {
        prod.powf(1.0 / k as f64)
    } else if prod == 0.0 && w[0] == 0.0 {
        0.0
    } else {
        (w.iter().map(|x| x.ln()).sum::<f64>() / k as f64).exp()
    }
}

fn rotate_to_min(mut cycle: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = cycle.iter().enumerate().min_by_key(|(_, &v)| v).map(|(p, _)| p) {
        cycle.rotate_left(pos);
    }
    cycle
}

/// Karp's maximum cycle mean on log weights, returning μ(A) and a critical
/// cycle recovered from the length-n walk to the maximising node.
fn karp(a: &MaxMatrix) -> (f64, Vec<usize>) {
    let n = a.n();
    let lw: Vec<f64> = a.as_slice().iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();

    // best[k][v]: heaviest walk of exactly k edges ending at v, any start.
    let mut best = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    let mut pred = vec![vec![usize::MAX; n]; n + 1];
    best[0].fill(0.0);
    for k in 1..=n {
        for u in 0..n {
            let du = best[k - 1][u];
            if du == f64::NEG_INFINITY {
                continue;
            }
            for v in 0..n {
                let w = lw[u * n + v];
                if w == f64::NEG_INFINITY {
                    continue;
                }
                if du + w > best[k][v] {
                    best[k][v] = du + w;
                    pred[k][v] = u;
                }
            }
        }
    }

    let mut lambda = f64::NEG_INFINITY;
    let mut arg = None;
    for v in 0..n {
        let dn = best[n][v];
        if dn == f64::NEG_INFINITY {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| best[k][v] > f64::NEG_INFINITY)
            .map(|k| (dn - best[k][v]) / (n - k) as f64)
            .fold(f64::INFINITY, f64::min);
        if worst > lambda {
            lambda = worst;
            arg = Some(v);
        }
    }
    let Some(end) = arg else {
        return (0.0, Vec::new());
    };

    let mut walk = vec![end; n + 1];
    for k in (1..=n).rev() {
        walk[k - 1] = pred[k][walk[k]];
    }

    // Every cycle split off this walk has mean λ; keep the best in case of
    // rounding-level ties.
    let mut stack: Vec<usize> = Vec::with_capacity(n + 1);
    let mut pos = vec![usize::MAX; n];
    let mut witness = Vec::new();
    let mut witness_mu = -1.0;
    for &node in &walk {
        if pos[node] != usize::MAX {
            let start = pos[node];
            let cycle: Vec<usize> = stack[start..].to_vec();
            for &c in &cycle {
                pos[c] = usize::MAX;
            }
            stack.truncate(start);
            let g = cycle_geometric_mean(a, &cycle);
            if g > witness_mu {
                witness_mu = g;
                witness = cycle;
            }
        }
        pos[node] = stack.len();
        stack.push(node);
    }
    (witness_mu, rotate_to_min(witness))
}

/// μ(A) alone.
pub fn mu(a: &MaxMatrix) -> f64 {
    karp(a).0
}

/// Maximal cycle geometric mean with a witness cycle and a uniqueness verdict.
pub fn cycle_mean(a: &MaxMatrix, tol: Tolerance) -> CycleMeanResult {
    let (mu, witness_cycle) = karp(a);
    let critical = if mu == 0.0 {
        CriticalCycles::Acyclic
    } else if a.n() > UNIQUENESS_LIMIT {
        CriticalCycles::Unknown
    } else if count_critical_cycles(a, mu, tol, 2) == 1 {
        CriticalCycles::Unique
    } else {
        CriticalCycles::Multiple
    };
    CycleMeanResult { mu, witness_cycle, critical }
}

/// Edges lying on some cycle of mean `mu`: `b_ij · b*_ji ≈ 1` for `B = A/mu`.
fn critical_edges(a: &MaxMatrix, mu: f64, tol: Tolerance) -> Vec<Vec<usize>> {
    let n = a.n();
    let b = a.scale(1.0 / mu);
    let plus = b.plus_closure();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    let bij = b.get(i, j);
                    let back = if i == j { 1.0 } else { plus.get(j, i) };
                    bij > 0.0 && tol.le(1.0, bij * back)
                })
                .collect()
        })
        .collect()
}

/// Counts elementary cycles of the critical graph, stopping at `cap`.
fn count_critical_cycles(a: &MaxMatrix, mu: f64, tol: Tolerance, cap: usize) -> usize {
    let adj = critical_edges(a, mu, tol);
    let n = a.n();
    let mut count = 0;
    let mut on_path = vec![false; n];
    for s in 0..n {
        // Cycles whose smallest node is s.
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        on_path[s] = true;
        while let Some(top) = stack.last_mut() {
            let u = top.0;
            if let Some(&v) = adj[u].get(top.1) {
                top.1 += 1;
                if v == s {
                    count += 1;
                    if count >= cap {
                        return count;
                    }
                } else if v > s && !on_path[v] {
                    on_path[v] = true;
                    stack.push((v, 0));
                }
            } else {
                on_path[u] = false;
                stack.pop();
            }
        }
    }
    count
}

/// Strongly connected components of the positive-entry digraph, emitted by
/// Tarjan's algorithm: every component appears after all components it
/// reaches. Nodes inside a component are sorted.
pub fn strongly_connected_components(a: &MaxMatrix) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(u, next)) = call.last() {
            if next < n {
                call.last_mut().unwrap().1 += 1;
                let v = next;
                if a.get(u, v) == 0.0 {
                    continue;
                }
                if index[v] == usize::MAX {
                    index[v] = counter;
                    low[v] = counter;
                    counter += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    call.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[u]);
                }
                if low[u] == index[u] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == u {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// `D(A)` strongly connected. A 1×1 matrix is irreducible by convention.
pub fn is_irreducible(a: &MaxMatrix) -> bool {
    a.n() == 1 || strongly_connected_components(a).len() == 1
}

/// Block lower triangular reordering by communicating classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusForm {
    /// `permutation[p]` is the original index placed at position `p`.
    pub permutation: Vec<usize>,
    /// Classes in block order; a class only reaches classes before it.
    pub classes: Vec<Vec<usize>>,
    /// μ of each diagonal block.
    pub block_mus: Vec<f64>,
    /// `access[j][i]`: class `j` reaches class `i` by a path (`j != i`).
    pub access: Vec<Vec<bool>>,
}

impl FrobeniusForm {
    pub fn class_of(&self, node: usize) -> usize {
        self.classes.iter().position(|c| c.contains(&node)).expect("node out of range")
    }

    pub fn has_access(&self, from: usize, to: usize) -> bool {
        self.access[from][to]
    }

    /// `P A Pᵀ` for the stored permutation.
    pub fn reorder(&self, a: &MaxMatrix) -> MaxMatrix {
        a.submatrix(&self.permutation)
    }

    /// Largest diagonal-block μ, which equals μ(A).
    pub fn max_block_mu(&self) -> f64 {
        self.block_mus.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_block_lower_triangular(&self, a: &MaxMatrix) -> bool {
        let mut block = vec![0; a.n()];
        for (c, nodes) in self.classes.iter().enumerate() {
            for &v in nodes {
                block[v] = c;
            }
        }
        (0..a.n()).all(|i| (0..a.n()).all(|j| a.get(i, j) == 0.0 || block[j] <= block[i]))
    }
}

pub fn frobenius_form(a: &MaxMatrix) -> FrobeniusForm {
    let classes = strongly_connected_components(a);
    let p = classes.len();
    let mut class_of = vec![0; a.n()];
    for (c, nodes) in classes.iter().enumerate() {
        for &v in nodes {
            class_of[v] = c;
        }
    }
    let mut access = vec![vec![false; p]; p];
    for c in 0..p {
        let mut reach = vec![false; p];
        for &u in &classes[c] {
            for v in 0..a.n() {
                let d = class_of[v];
                if a.get(u, v) > 0.0 && d != c {
                    debug_assert!(d < c);
                    reach[d] = true;
                    for e in 0..d {
                        reach[e] |= access[d][e];
                    }
                }
            }
        }
        access[c] = reach;
    }
    let block_mus = classes.iter().map(|nodes| mu(&a.submatrix(nodes))).collect();
    let permutation = classes.iter().flatten().copied().collect();
    FrobeniusForm { permutation, classes, block_mus, access }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Max entry is 1.
    pub vector: MaxVector,
    pub side: Side,
}

/// Critical-node column of the Kleene star of `A/μ`, normalised.
///
/// `A` need not be irreducible; the caller decides which node to take.
pub(crate) fn star_column(a: &MaxMatrix, lambda: f64, tol: Tolerance) -> Result<(MaxMatrix, Vec<usize>)> {
    let b = a.scale(1.0 / lambda);
    let plus = b.plus_closure();
    let n = a.n();
    let worst = (0..n).map(|i| plus.get(i, i)).fold(0.0, f64::max);
    if !tol.le(worst, 1.0) {
        return Err(Error::Divergent { mu: mu(&b) });
    }
    let critical = (0..n).filter(|&i| tol.le(1.0, plus.get(i, i))).collect();
    let star = MaxMatrix::from_fn(n, |i, j| if i == j { plus.get(i, j).max(1.0) } else { plus.get(i, j) });
    Ok((star, critical))
}

/// Principal max eigenpair of an irreducible matrix.
///
/// The vector is the column of `(A/μ)*` at the smallest critical node,
/// scaled to max entry 1. `Side::Left` returns `v` with `vᵀ ⊗ A = μ vᵀ`.
pub fn principal_eigenpair(a: &MaxMatrix, side: Side, tol: Tolerance) -> Result<EigenPair> {
    if !is_irreducible(a) {
        return Err(Error::Reducible { form: Box::new(frobenius_form(a)) });
    }
    let work = match side {
        Side::Right => a.clone(),
        Side::Left => a.transpose(),
    };
    let lambda = mu(&work);
    if lambda == 0.0 {
        // only the 1x1 zero matrix is irreducible with μ = 0
        return Ok(EigenPair { lambda, vector: MaxVector::ones(1), side });
    }
    let (star, critical) = star_column(&work, lambda, tol)?;
    let c = *critical.first().ok_or_else(|| Error::ToleranceFailure("no critical node".into()))?;
    let column: Vec<f64> = (0..a.n()).map(|i| star.get(i, c)).collect();
    let vector = MaxVector::from_vec_unchecked(column).normalized();
    Ok(EigenPair { lambda, vector, side })
}

/// Gradient of μ at a matrix whose critical cycle is unique: entry `(p, q)`
/// is `μ / (k a_pq)` on the critical cycle of length `k`, zero elsewhere.
pub fn mu_gradient(a: &MaxMatrix, tol: Tolerance) -> Result<Vec<Vec<f64>>> {
    let res = cycle_mean(a, tol);
    match res.critical {
        CriticalCycles::Acyclic => return Err(Error::DegenerateSpectrum),
        CriticalCycles::Unknown => return Err(Error::UniquenessUnknown { n: a.n(), limit: UNIQUENESS_LIMIT }),
        CriticalCycles::Multiple => return Err(Error::NotDifferentiable),
        CriticalCycles::Unique => {}
    }
    let n = a.n();
    let cyc = &res.witness_cycle;
    let k = cyc.len();
    let mut grad = vec![vec![0.0; n]; n];
    for t in 0..k {
        let (p, q) = (cyc[t], cyc[(t + 1) % k]);
        grad[p][q] = res.mu / (k as f64 * a.get(p, q));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> MaxMatrix {
        MaxMatrix::from_rows(rows).unwrap()
    }

    fn example_s() -> MaxMatrix {
        m(&[&[1.0 / 3.0, 0.5, 1.0], &[0.75, 0.8, 10.0 / 3.0], &[0.6, 0.2, 0.25]])
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn identity_cycle_mean() {
        let r = cycle_mean(&MaxMatrix::identity(3), tol());
        assert_eq!(r.mu, 1.0);
        assert_eq!(r.witness_cycle.len(), 1);
        assert_eq!(r.critical, CriticalCycles::Multiple);
    }

    #[test]
    fn example_aggregate_cycle_mean() {
        let r = cycle_mean(&example_s(), tol());
        assert!((r.mu - 1.0).abs() < 1e-15);
        assert_eq!(r.witness_cycle, vec![0, 1, 2]);
        assert!(r.unique_critical());
    }

    #[test]
    fn self_loop_beats_two_cycle() {
        let r = cycle_mean(&m(&[&[2.0, 3.0], &[4.0, 5.0]]), tol());
        assert_eq!(r.mu, 5.0);
        assert_eq!(r.witness_cycle, vec![1]);
        assert!(r.unique_critical());
    }

    #[test]
    fn acyclic_has_zero_mean() {
        let r = cycle_mean(&m(&[&[0.0, 1.0, 2.0], &[0.0, 0.0, 3.0], &[0.0, 0.0, 0.0]]), tol());
        assert_eq!(r.mu, 0.0);
        assert!(r.witness_cycle.is_empty());
        assert_eq!(r.critical, CriticalCycles::Acyclic);
        assert_eq!(cycle_mean(&MaxMatrix::zeros(1), tol()).mu, 0.0);
    }

    #[test]
    fn one_by_one_convention() {
        let a = m(&[&[0.7]]);
        assert_eq!(mu(&a), 0.7);
        assert!(is_irreducible(&a));
        assert!(is_irreducible(&MaxMatrix::zeros(1)));
    }

    #[test]
    fn uniqueness_undecided_above_limit() {
        let a = MaxMatrix::ones(UNIQUENESS_LIMIT + 1);
        assert_eq!(cycle_mean(&a, tol()).critical, CriticalCycles::Unknown);
        assert!(matches!(mu_gradient(&a, tol()), Err(Error::UniquenessUnknown { .. })));
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&MaxMatrix::ones(4)));
        assert!(!is_irreducible(&m(&[&[2.0, 0.0], &[1.0, 1.0]])));
        assert!(is_irreducible(&example_s()));
        assert!(!is_irreducible(&MaxMatrix::identity(2)));
    }

    #[test]
    fn right_eigenpair_of_swap() {
        let e = principal_eigenpair(&m(&[&[0.0, 0.5], &[2.0, 0.0]]), Side::Right, tol()).unwrap();
        assert_eq!(e.lambda, 1.0);
        assert_eq!(e.vector.as_slice(), &[0.5, 1.0]);
    }

    #[test]
    fn left_eigenpair_of_example_aggregate() {
        let e = principal_eigenpair(&example_s(), Side::Left, tol()).unwrap();
        assert!((e.lambda - 1.0).abs() < 1e-15);
        for (x, y) in e.vector.as_slice().iter().zip([0.6, 0.3, 1.0]) {
            assert!((x - y).abs() < 1e-15, "{:?}", e.vector);
        }
    }

    #[test]
    fn eigenpair_errors() {
        let err = principal_eigenpair(&MaxMatrix::identity(2), Side::Right, tol()).unwrap_err();
        let Error::Reducible { form } = err else { panic!("expected reducible") };
        assert_eq!(form.classes.len(), 2);
        let zero = principal_eigenpair(&MaxMatrix::zeros(1), Side::Right, tol()).unwrap();
        assert_eq!((zero.lambda, zero.vector.as_slice()), (0.0, &[1.0][..]));
    }

    #[test]
    fn frobenius_of_lower_triangular() {
        let a = m(&[&[2.0, 0.0], &[1.0, 1.0]]);
        let f = frobenius_form(&a);
        assert_eq!(f.classes, vec![vec![0], vec![1]]);
        assert_eq!(f.block_mus, vec![2.0, 1.0]);
        assert!(f.has_access(1, 0));
        assert!(!f.has_access(0, 1));
        assert!(f.is_block_lower_triangular(&a));
    }

    #[test]
    fn frobenius_of_irreducible_and_block_diagonal() {
        let f = frobenius_form(&example_s());
        assert_eq!(f.classes.len(), 1);
        assert!((f.block_mus[0] - 1.0).abs() < 1e-15);

        let a = m(&[&[0.0, 2.0, 0.0, 0.0], &[3.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 4.0], &[0.0, 0.0, 0.5, 0.0]]);
        let f = frobenius_form(&a);
        assert_eq!(f.classes.len(), 2);
        assert!(!f.has_access(0, 1) && !f.has_access(1, 0));
        assert!((f.max_block_mu() - mu(&a)).abs() < 1e-15);
    }

    #[test]
    fn frobenius_access_is_transitive() {
        // 2 -> 1 -> 0 chain of singleton classes.
        let a = m(&[&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        let f = frobenius_form(&a);
        assert_eq!(f.classes, vec![vec![0], vec![1], vec![2]]);
        assert!(f.has_access(2, 0));
        assert!(f.is_block_lower_triangular(&a));
        assert_eq!(f.reorder(&a), a);
    }

    #[test]
    fn gradient_examples() {
        let g = mu_gradient(&m(&[&[2.0, 3.0], &[4.0, 5.0]]), tol()).unwrap();
        assert_eq!(g, vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
        let g = mu_gradient(&MaxMatrix::diagonal(&[3.0, 1.0]).unwrap(), tol()).unwrap();
        assert_eq!(g, vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(mu_gradient(&MaxMatrix::identity(2), tol()), Err(Error::NotDifferentiable)));
        assert!(matches!(mu_gradient(&MaxMatrix::zeros(2), tol()), Err(Error::DegenerateSpectrum)));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let a = example_s();
        let g = mu_gradient(&a, tol()).unwrap();
        let h = 1e-6;
        for p in 0..3 {
            for q in 0..3 {
                let x = a.get(p, q);
                if x < h {
                    continue;
                }
                let fd =
                    (mu(&a.with_entry(p, q, x + h).unwrap()) - mu(&a.with_entry(p, q, x - h).unwrap())) / (2.0 * h);
                assert!((fd - g[p][q]).abs() < 1e-5, "({p},{q}) fd={fd} g={}", g[p][q]);
            }
        }
    }
}
