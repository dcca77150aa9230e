//! Sign patterns, root orders and exact realizability of hyperbolic polynomials.

pub mod patterns;
pub mod certificates;
pub mod decision;
pub mod polyalgebra;
pub mod report;
pub mod witness;
