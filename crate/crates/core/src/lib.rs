//! Finite-scale constructions around the Urysohn space: exact finite metric
//! spaces, permutation groups and free products, maximal invariant metrics on
//! finite groups, concentration of measure, and the recursive extension of
//! free isometric actions.

pub mod concentration;
pub mod group;
pub mod hamming;
pub mod invariant;
pub mod io;
pub mod levy;
pub mod metric;
pub mod perm;
pub mod quotient;
pub mod rational;
pub mod seeds;
pub mod word;

pub use metric::{FiniteMetricSpace, MetricError, MetricSpace};
pub use rational::Rational;
