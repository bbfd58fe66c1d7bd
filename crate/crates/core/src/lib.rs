//! Random invariant and near-invariant states of tensor-power representations.
//!
//! The crate builds the subspaces of `V^{⊗n}` that are fixed (or almost fixed)
//! by the collective action of SU(d), samples uniformly random states in them,
//! and evaluates the 2-Rényi entanglement of those states across a bipartite
//! cut, exactly where closed forms exist and by Monte Carlo otherwise.
//!
//! Module map:
//!
//! - [`numerics`]: dense/sparse complex linear algebra (Kronecker products,
//!   partial traces, orthonormal joint kernels).
//! - [`combinat`]: exact integer combinatorics (partitions, Gelfand-Tsetlin
//!   patterns, Weyl dimensions, tensor-power multiplicities).
//! - [`su2rep`]: spin operators, Racah Clebsch-Gordan coefficients, coupled
//!   bases and the near-invariant subspace.
//! - [`sudrep`]: gl(d) generators in the Gelfand-Tsetlin basis, collective
//!   operators, invariant subspaces and dual-pair singlets.
//! - [`entangle`]: purity, Rényi-2 entropy, exact first and second purity
//!   moments over an invariant ensemble, twirling identities.
//! - [`montecarlo`]: reproducible Haar sampling and purity statistics.
//! - [`asymptotics`]: finite-size scaling reports for the asymptotic claims.
//! - [`verify`]: named verification suites driven by the CLI.
//! - [`report`]: CSV rows and run manifests for purity experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod combinat;
pub mod entangle;
mod error;
pub mod limits;
pub mod montecarlo;
pub mod numerics;
pub mod report;
pub mod su2rep;
pub mod sudrep;
pub mod verify;

pub use combinat::{GTPattern, HalfInt, Partition};
pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, SparseOp, SubspaceBasis};
