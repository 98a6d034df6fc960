//! Shared inputs for the benchmarks.

use maxjsr::oracles::{generate, InstanceSpec};
use maxjsr::{MatrixSet, MaxMatrix};

/// Deterministic set with an irreducible aggregate.
pub fn irreducible_set(n: usize, members: usize, seed: u64) -> MatrixSet {
    generate(&InstanceSpec::new(n, members, seed).density(0.5).irreducible()).expect("irreducible draw")
}

/// Deterministic dense matrix.
pub fn dense_matrix(n: usize, seed: u64) -> MaxMatrix {
    irreducible_set(n, 1, seed).members()[0].1.clone()
}
