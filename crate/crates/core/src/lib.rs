//! Monte Carlo estimation of separability and PPT probabilities of random
//! bipartite states, binned over Bloch radii and Casimir invariants of the
//! reduced states.
//!
//! The pieces, bottom up:
//! - [`matrix`]: dense complex kernel (eigenvalues, partial trace/transpose, PPT test)
//! - [`states`]: reproducible Ginibre sampling of Hilbert-Schmidt and induced states
//! - [`invariants`]: su(d) bases, coherence vectors, Casimirs, two-qubit correlations
//! - [`stats`]: mergeable histograms, binomial intervals, flatness test, radial fits
//! - [`formula`]: the `P(alpha)` summation formula
//! - [`pipeline`]: sample -> record -> bins over index ranges

pub mod error;
pub mod formula;
pub mod invariants;
pub mod matrix;
pub mod pipeline;
pub mod special;
pub mod states;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
