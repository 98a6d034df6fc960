//! Max-times semiring arithmetic on nonnegative scalars, vectors and square
//! matrices.
//!
//! Addition is `a ⊕ b = max(a, b)` and multiplication is ordinary `a ⊗ b = ab`,
//! so `0` is the additive identity and `1` the multiplicative one. All storage
//! is row-major `f64`; entries are always finite and nonnegative.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used by every approximate comparison in the crate.
///
/// Two values are equal when `|a - b| <= tau * max(1, |a|, |b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {tau} must be finite and >= 0")));
        }
        Ok(Tolerance(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn scale(self, a: f64, b: f64) -> f64 {
        self.0 * 1f64.max(a.abs()).max(b.abs())
    }

    pub fn eq(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.scale(a, b)
    }

    /// `a <= b` up to tolerance.
    pub fn le(self, a: f64, b: f64) -> bool {
        a - b <= self.scale(a, b)
    }

    /// Purely relative comparison without the absolute floor of [`Tolerance::eq`].
    /// Used where the compared quantities may be far below one.
    pub fn rel_eq(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.0 * a.abs().max(b.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(Self::DEFAULT)
    }
}

fn check_entry(row: usize, col: usize, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEntry { row, col, value })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Nonnegative vector in the max algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MaxVector(Vec<f64>);

impl MaxVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension);
        }
        for (i, &x) in entries.iter().enumerate() {
            check_entry(i, 0, x)?;
        }
        Ok(MaxVector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        MaxVector(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        MaxVector(vec![1.0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        MaxVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_entry(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `x ≫ 0`.
    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn scale(&self, c: f64) -> MaxVector {
        MaxVector(self.0.iter().map(|&x| c * x).collect())
    }

    /// Rescales so the largest entry is 1. The zero vector is returned as is.
    pub fn normalized(&self) -> MaxVector {
        let m = self.max_entry();
        if m > 0.0 {
            MaxVector(self.0.iter().map(|x| x / m).collect())
        } else {
            self.clone()
        }
    }

    pub fn max_add(&self, other: &MaxVector) -> Result<MaxVector> {
        check_dim(self.len(), other.len())?;
        Ok(MaxVector(self.0.iter().zip(&other.0).map(|(a, b)| a.max(*b)).collect()))
    }

    pub(crate) fn from_vec_unchecked(v: Vec<f64>) -> Self {
        debug_assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        MaxVector(v)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for MaxVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MaxVector::new(v)
    }
}

impl From<MaxVector> for Vec<f64> {
    fn from(v: MaxVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for MaxVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Square nonnegative matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MaxMatrix {
    n: usize,
    data: Vec<f64>,
}

impl MaxMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        check_dim(n * n, data.len())?;
        for (k, &x) in data.iter().enumerate() {
            check_entry(k / n, k % n, x)?;
        }
        Ok(MaxMatrix { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            check_dim(n, row.len())?;
            data.extend_from_slice(row);
        }
        MaxMatrix::new(n, data)
    }

    pub(crate) fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        debug_assert!(data.iter().all(|x| x.is_finite() && *x >= 0.0));
        MaxMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        MaxMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn ones(n: usize) -> Self {
        MaxMatrix { n, data: vec![1.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &x) in d.iter().enumerate() {
            data[i * n + i] = x;
        }
        MaxMatrix::new(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Returns a copy with entry `(i, j)` replaced; errors on invalid values.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        check_entry(i, j, value)?;
        let mut out = self.clone();
        out.data[i * self.n + j] = value;
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// Multiplies every entry by `c >= 0`.
    pub fn scale(&self, c: f64) -> Self {
        assert!(c.is_finite() && c >= 0.0, "scale factor must be finite and nonnegative");
        MaxMatrix { n: self.n, data: self.data.iter().map(|&x| c * x).collect() }
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Entrywise `self <= other`.
    pub fn le(&self, other: &MaxMatrix) -> bool {
        self.n == other.n && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    /// `(A ⊗ B)_ij = max_k a_ik b_kj`.
    pub fn max_mul(&self, other: &MaxMatrix) -> Result<MaxMatrix> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let out = &mut data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    let p = a * b;
                    if p > *o {
                        *o = p;
                    }
                }
            }
        }
        Ok(MaxMatrix { n, data })
    }

    /// Entrywise maximum.
    pub fn max_add(&self, other: &MaxMatrix) -> Result<MaxMatrix> {
        check_dim(self.n, other.n)?;
        Ok(MaxMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a.max(*b)).collect() })
    }

    /// `A^0 = I`, `A^p = A ⊗ A^(p-1)`.
    pub fn max_power(&self, p: u32) -> MaxMatrix {
        let mut acc = MaxMatrix::identity(self.n);
        for _ in 0..p {
            acc = self.max_mul(&acc).expect("same dimension");
        }
        acc
    }

    /// `(A ⊗ x)_i = max_j a_ij x_j`.
    pub fn apply(&self, x: &MaxVector) -> Result<MaxVector> {
        check_dim(self.n, x.len())?;
        Ok(MaxVector(
            self.rows().map(|row| row.iter().zip(x.as_slice()).map(|(a, b)| a * b).fold(0.0, f64::max)).collect(),
        ))
    }

    /// `(vᵀ ⊗ A)_j = max_i v_i a_ij`.
    pub fn left_apply(&self, v: &MaxVector) -> Result<MaxVector> {
        check_dim(self.n, v.len())?;
        let mut out = vec![0.0f64; self.n];
        for (row, &vi) in self.rows().zip(v.as_slice()) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o = o.max(vi * a);
            }
        }
        Ok(MaxVector(out))
    }

    /// Matrix norm induced by the vector ∞-norm: the largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max)
    }

    /// `‖A - B‖_∞` in the induced norm.
    pub fn dist_inf(&self, other: &MaxMatrix) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .rows()
            .zip(other.rows())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(0.0, f64::max))
    }

    /// Largest entrywise difference `max_ij |a_ij - b_ij|`.
    pub fn dist_max(&self, other: &MaxMatrix) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self.data.iter().zip(&other.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    }

    /// Principal submatrix on the given index set, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> MaxMatrix {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Maximum-weight path closure `B⁺ = B ⊕ B² ⊕ ···`, computed by a
    /// max-times Floyd–Warshall pass. Exact when every cycle has weight
    /// at most one.
    pub(crate) fn plus_closure(&self) -> MaxMatrix {
        let n = self.n;
        let mut c = self.data.clone();
        for k in 0..n {
            for i in 0..n {
                let cik = c[i * n + k];
                if cik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let cand = cik * c[k * n + j];
                    if cand > c[i * n + j] {
                        c[i * n + j] = cand;
                    }
                }
            }
        }
        MaxMatrix { n, data: c }
    }

    /// Kleene star `B* = I ⊕ B ⊕ ··· ⊕ B^(n-1)`.
    ///
    /// Requires `μ(B) <= 1`; a cycle mean above `1 + τ` is reported as
    /// [`Error::Divergent`].
    pub fn kleene_star(&self, tol: Tolerance) -> Result<MaxMatrix> {
        let n = self.n;
        let mut plus = self.plus_closure();
        let worst = (0..n).map(|i| plus.get(i, i)).fold(0.0, f64::max);
        if !tol.le(worst, 1.0) {
            return Err(Error::Divergent { mu: crate::spectral::mu(self) });
        }
        for i in 0..n {
            let d = &mut plus.data[i * n + i];
            *d = d.max(1.0);
        }
        Ok(plus)
    }
}

impl fmt::Debug for MaxMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for MaxMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        MaxMatrix::from_rows(&rows)
    }
}

impl From<MaxMatrix> for Vec<Vec<f64>> {
    fn from(m: MaxMatrix) -> Self {
        m.to_rows()
    }
}

/// Max-invertible matrix: a permutation `σ` with positive weights `v`,
/// representing `p_{i,σ(i)} = v_i` and zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPermutation {
    sigma: Vec<usize>,
    weights: Vec<f64>,
}

impl MaxPermutation {
    pub fn new(sigma: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        check_dim(n, weights.len())?;
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidPermutation { n });
            }
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        Ok(MaxPermutation { sigma, weights })
    }

    pub fn identity(n: usize) -> Self {
        MaxPermutation { sigma: (0..n).collect(), weights: vec![1.0; n] }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_matrix(&self) -> MaxMatrix {
        MaxMatrix::from_fn(self.n(), |i, j| if self.sigma[i] == j { self.weights[i] } else { 0.0 })
    }

    /// The max-algebraic inverse: `q_ij = 1/v_j` at `j = σ⁻¹(i)`.
    pub fn inverse(&self) -> MaxPermutation {
        let n = self.n();
        let mut inv = vec![0; n];
        for (i, &s) in self.sigma.iter().enumerate() {
            inv[s] = i;
        }
        let weights = inv.iter().map(|&j| 1.0 / self.weights[j]).collect();
        MaxPermutation { sigma: inv, weights }
    }

    /// `P ⊗ A ⊗ P⁻¹`, entry `(i, j)` equal to `(v_i / v_j) a_{σ(i), σ(j)}`.
    pub fn conjugate(&self, a: &MaxMatrix) -> Result<MaxMatrix> {
        check_dim(self.n(), a.n())?;
        let (s, v) = (&self.sigma, &self.weights);
        Ok(MaxMatrix::from_fn(a.n(), |i, j| v[i] / v[j] * a.get(s[i], s[j])))
    }
}
