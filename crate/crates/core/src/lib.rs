//! Numerical companion to Hardy-Littlewood style heuristics for linear
//! patterns in the primes: sieved tables, Fourier tools, linear systems and
//! local densities, pattern counts, Gowers norms, nilsequences on the
//! Heisenberg nilmanifold, and quadratic obstruction sets.

pub mod arith;
pub mod counting;
pub mod error;
pub mod fourier;
pub mod gowers;
pub mod linsys;
pub mod nilseq;
pub mod numeric;
pub mod obstruction;

pub use error::{Error, Result};
