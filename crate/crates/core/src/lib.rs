//! A computational laboratory for consecutive sums of integer sequences.
//!
//! Given a finite increasing sequence `a`, the object of study is the
//! set `S(a)` of its consecutive (interval) sums and the size `|S(a)|`
//! relative to `n^2`. The crate provides:
//!
//! - [`sequences`]: the sequence families (identity, random-sign
//!   `3i + e_i`, block, uniform permutation, p-random subset, explicit)
//!   and two independent counters for `|S(a)|`;
//! - [`energy`]: exact additive energy `E(P)` of partial-sum sets and
//!   the Cauchy-Schwarz lower bound it implies on `|S(a)|`;
//! - [`probability`]: exact Binomial(m, 1/2) and Rademacher-sum
//!   distributions, and integer-exact verification of the divisibility
//!   inequality `P(X = 0 mod m) <= 1/m + 2/sqrt(n)`;
//! - [`bounds`]: the region measure `|Lambda_alpha|`, minimization of
//!   `h`, lattice counting, the finite-n upper-bound inequality, and
//!   gcd-sum diagnostics via the Pillai identity;
//! - [`experiments`]: deterministic, seedable Monte Carlo harnesses and
//!   the serialized record format.
//!
//! Randomness is always explicit: a master 64-bit seed plus a substream
//! index determine every draw (see [`rng`]), so any experiment is
//! reproducible from its recorded parameters alone.

pub mod bounds;
pub mod energy;
pub mod error;
pub mod experiments;
mod numeric;
pub mod probability;
pub mod rng;
pub mod sequences;

pub use bounds::{GcdSumRow, LatticeCount, MathConstants, UpperBoundCheck};
pub use energy::EnergyReport;
pub use error::{Error, Result};
pub use experiments::{ExperimentRecord, McEnergyEstimate, PermutationEstimate};
pub use probability::{LemmaRow, PmfTable, RademacherPmf};
pub use sequences::{PartialSumSet, Sequence, SequenceKind, SequenceParams};
