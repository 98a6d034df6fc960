//! Max-times spectral theory for finite sets of nonnegative matrices: maximal
//! cycle means, the joint spectral radius, extremal and Barabanov norms,
//! finiteness certificates and max-convex geometry.

pub mod error;
pub mod geometry;
pub mod jsr;
pub mod maxcore;
pub mod oracles;
pub mod regularity;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use geometry::{EccentricityValue, HullMode, MembershipCertificate};
pub use jsr::{FinitenessCertificate, MatrixSet, NonexistenceWitness, WeightedMaxNorm};
pub use maxcore::{MaxMatrix, MaxPermutation, MaxVector, Tolerance};
pub use spectral::{CriticalCycles, CycleMeanResult, EigenPair, FrobeniusForm, Side};
