//! Static analyzer for a C subset based on abstract interpretation over a
//! control-flow graph, with interval, octagon and sign domains.

pub mod cfg;
pub mod checks;
pub mod cli;
pub mod domains;
pub mod engine;
pub mod frontend;
pub mod normalizer;
pub mod report;

/// Exact rational numbers used for all numeric bounds.
pub type Rational = num_rational::BigRational;
