//! Exact computation of the Dobrushin and Steif distances between
//! probability distributions on finite products of finite metric spaces.
//!
//! Both distances are computed as optima of linear programs over exact
//! rational numbers, so equalities that hold in theory (the two distances
//! coincide; Kantorovich–Rubinstein duality at a fixed weight vector;
//! the c-transform fixed-point characterisation of 1-Lipschitz functions)
//! can be checked as bit-exact identities rather than up to tolerance.
//!
//! The crate is organised around:
//!
//! - [`model`]: sites, product spaces, configurations, distributions,
//!   couplings, weight vectors, functions and pair costs, with exact
//!   validation of every invariant at construction;
//! - [`smoothness`]: partial Lipschitz constants, the Dobrushin semi-norm,
//!   weighted Lipschitz balls and the c-transform toolkit;
//! - [`lp`]: a self-contained exact simplex solver over rationals;
//! - [`metrics`]: the distance computations and their duals;
//! - [`verify`]: randomized instance generation and the executable
//!   identity-check suite;
//! - [`mod@format`]: the versioned text formats for instances, functions,
//!   weights, costs and result documents.

pub mod format;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod rational;
pub mod smoothness;
pub mod verify;

pub use model::{
    Config, Coupling, Distribution, ConfigFunction, ProductSpace, SemiMetric, Site, SiteWeights,
    ValidationError,
};
pub use rational::Rational;
