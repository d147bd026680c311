//! Analysis and simulation of polynomial transformations of long-range
//! dependent Gaussian sequences.
//!
//! The crate is organized in four layers:
//!
//! - [`hermite`]: exact rational polynomial algebra in the probabilists'
//!   Hermite basis: basis conversion, products via the linearization
//!   formula, composition, Hermite rank, and Gaussian moments.
//! - [`dependence`]: covariance models `γ(n) = n^{2H-2} L(n)` and
//!   fractional Gaussian noise, SRD/LRD classification by the sign of
//!   `(2H-2)m + 1`, exact subordinated covariances, partial-sum variance
//!   oracles, and the search for a polynomial `Q` that turns a short-range
//!   dependent transformation into a long-range dependent one.
//! - [`simulate`]: exact stationary Gaussian path generation by circulant
//!   embedding, a dense-factorization oracle for validation, reproducible
//!   counter-based seeding, and path export.
//! - [`experiments`]: variance-growth fits, central-limit checks, the
//!   counterexample pipeline, and the dichotomy scan over `(m, H)`.

pub mod dependence;
pub mod experiments;
pub mod hermite;
mod numeric;
pub mod simulate;
pub mod stats;

pub use dependence::{
    classify, find_q, theoretical_exponent, Classification, CovarianceModel, DependenceClass,
    DependenceError, SlowlyVarying,
};
pub use hermite::{compose, AlgebraError, HermitePoly, MonomialPoly};
pub use simulate::{PathBatch, SimulationConfig, SimulationError};
